"""Evaluation metrics: speed-error statistics and track accuracy."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class SpeedErrorStats:
    mean: float
    median: float
    variance: float
    samples: int

    def __post_init__(self):
        if self.samples < 1:
            raise MetricsError("statistics need at least one sample")
        if not self.variance >= 0:
            raise MetricsError("variance must be non-negative")

    def as_dict(self) -> dict:
        return {"mean": self.mean, "median": self.median, "variance": self.variance,
                "samples": self.samples}


def stats_from_errors(errors: Sequence[float]) -> SpeedErrorStats:
    """Mean, median and population variance of signed speed errors."""
    e = np.sort(np.asarray(errors, dtype=float))
    if e.size == 0:
        raise MetricsError("no speed-error samples")
    mean = float(np.mean(e))
    return SpeedErrorStats(mean, float(np.median(e)), float(np.mean((e - mean) ** 2)), int(e.size))


def speed_errors(estimates: Sequence[tuple[float, Sequence[float]]],
                 truth: Sequence[tuple[float, Sequence[float]]],
                 max_dt: float = 1.0 / 14.0) -> np.ndarray:
    """``|v_est| - |v_true|`` for every estimate with a truth sample within ``max_dt``.

    Each estimate is paired with the truth sample closest in time; estimates
    with no truth inside the window are dropped.
    """
    if not truth:
        return np.zeros(0)
    tt = np.array([t for t, _ in truth], dtype=float)
    order = np.argsort(tt, kind="stable")
    tt = tt[order]
    ts = np.array([math.hypot(*truth[i][1][:2]) for i in order])
    out = []
    for t, v in estimates:
        j = int(np.searchsorted(tt, t))
        cand = [i for i in (j - 1, j) if 0 <= i < len(tt)]
        i = min(cand, key=lambda i: (abs(tt[i] - t), i))
        if abs(tt[i] - t) <= max_dt + 1e-12:
            out.append(math.hypot(v[0], v[1]) - ts[i])
    return np.array(out, dtype=float)


def speed_error_stats(estimates, truth, max_dt: float = 1.0 / 14.0) -> SpeedErrorStats:
    errs = speed_errors(estimates, truth, max_dt)
    if errs.size == 0:
        raise MetricsError("no estimate could be matched to a truth sample")
    return stats_from_errors(errs)


def rmse(values: Sequence[float]) -> float | None:
    v = np.asarray(values, dtype=float)
    return float(np.sqrt(np.mean(v ** 2))) if v.size else None
