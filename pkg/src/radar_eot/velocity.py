"""Cluster velocity from compensated Doppler and bearing.

Each point of a rigid cluster satisfies ``r_dot = vx cos(phi) + vy sin(phi)``.
The main estimator runs several recursive-least-squares filters over random
orderings of the points, rejects a point whenever its update would move either
velocity component by more than a threshold, and keeps the filter with the
smallest mean reprojection error over its inliers. OLS and RANSAC+OLS are the
comparison baselines.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels


class VelocityError(ValueError):
    pass


class NotEnoughPoints(VelocityError):
    pass


class Degenerate(VelocityError):
    pass


@dataclass(frozen=True)
class RlsConfig:
    outlier_delta_threshold: float = 0.4
    warmup_updates: int = 3
    num_filters: int = 10
    p0_scale: float = 30.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.outlier_delta_threshold <= 0 or self.p0_scale <= 0:
            raise ValueError("threshold and p0_scale must be positive")
        if self.warmup_updates < 0 or self.num_filters < 1:
            raise ValueError("warmup_updates must be >= 0 and num_filters >= 1")


@dataclass(frozen=True)
class RlsFilter:
    v: tuple[float, float]
    P: np.ndarray = field(repr=False)
    update_count: int = 0
    inliers: frozenset = frozenset()
    rejected: frozenset = frozenset()

    @classmethod
    def initial(cls, v0=(0.0, 0.0), p0_scale: float = 1.0) -> "RlsFilter":
        return cls((float(v0[0]), float(v0[1])), np.eye(2) * p0_scale)


@dataclass(frozen=True)
class VelocityEstimate:
    v: tuple[float, float]
    reprojection_error: float
    inlier_count: int
    filter_index: int
    seed: tuple[float, float]
    P: np.ndarray = field(repr=False)
    inliers: np.ndarray = field(repr=False)
    filter_errors: tuple[float, ...] = field(default=(), repr=False)

    @property
    def condition_number(self) -> float:
        """Gain-matrix conditioning; large values flag an unobservable direction."""
        ev = np.linalg.eigvalsh(self.P)
        return float(ev[-1] / ev[0]) if ev[0] > 0 else math.inf


def _split(points) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(points, dtype=float).reshape(-1, 2)
    return a[:, 0], a[:, 1]


def cah_seed(centre_now, centre_prev, t_now: float, t_prev: float) -> tuple[float, float]:
    """Finite-difference velocity of a cluster centre between two time steps."""
    if not t_now > t_prev:
        raise ValueError(f"t_now ({t_now}) must be after t_prev ({t_prev})")
    dt = t_now - t_prev
    return ((centre_now[0] - centre_prev[0]) / dt, (centre_now[1] - centre_prev[1]) / dt)


def _gain(f: RlsFilter, phi_w: float):
    reg = np.array([math.cos(phi_w), math.sin(phi_w)])
    g = f.P @ reg
    den = 1.0 + reg @ g
    return reg, g, den


def rls_update(f: RlsFilter, phi_w: float, r_dot: float, index=None) -> RlsFilter:
    """One committed RLS step (unit forgetting factor)."""
    reg, g, den = _gain(f, phi_w)
    e = r_dot - reg @ np.asarray(f.v)
    v = np.asarray(f.v) + g / den * e
    P = f.P - np.outer(g, g) / den
    inl = f.inliers if index is None else f.inliers | {index}
    return RlsFilter((float(v[0]), float(v[1])), P, f.update_count + 1, inl, f.rejected)


def run_filter(points, order, seed_v0, cfg: RlsConfig = RlsConfig()) -> RlsFilter:
    """Feed ``points`` ((phi_w, r_dot) pairs) in ``order`` through one filter."""
    phi, rr = _split(points)
    if len(phi) < 2:
        raise NotEnoughPoints(f"need at least 2 points, got {len(phi)}")
    order = np.asarray(order, dtype=np.int64).reshape(1, -1)
    v, p, cnt, inl, _, _ = _kernels.rls_multi(
        phi, rr, order, seed_v0[0], seed_v0[1], cfg.p0_scale,
        cfg.outlier_delta_threshold, cfg.warmup_updates)
    P = np.array([[p[0, 0], p[0, 1]], [p[0, 1], p[0, 2]]])
    fed = set(order[0].tolist())
    inliers = frozenset(np.flatnonzero(inl[0]).tolist())
    return RlsFilter((float(v[0, 0]), float(v[0, 1])), P, int(cnt[0]), inliers,
                     frozenset(fed - inliers))


def reprojection_error(f: RlsFilter, points) -> float:
    """Mean |predicted - measured| range rate over the filter's inliers."""
    if not f.inliers:
        raise VelocityError("filter has no inliers")
    phi, rr = _split(points)
    idx = np.array(sorted(f.inliers))
    pred = f.v[0] * np.cos(phi[idx]) + f.v[1] * np.sin(phi[idx])
    return float(np.mean(np.abs(pred - rr[idx])))


def axis_information(phi_w, heading: float) -> float:
    """How much Doppler information the bearings carry about motion along ``heading``.

    Equals the sum of ``cos(phi - heading)**2``; the along-axis speed from
    ``n`` points with range-rate noise ``s`` has standard deviation of roughly
    ``s / sqrt(information)``.
    """
    phi = np.asarray(phi_w, dtype=float)
    return float(np.sum(np.cos(phi - heading) ** 2))


def random_orders(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """``k`` independent uniform permutations of ``range(n)``, one per row."""
    return np.argsort(rng.random((k, n)), axis=1, kind="stable")


def estimate_velocity(points, seed_v0=(0.0, 0.0), cfg: RlsConfig = RlsConfig(),
                      rng: np.random.Generator | None = None) -> VelocityEstimate:
    """Multi-start RLS with outlier rejection; best filter by reprojection error.

    Orderings come from ``rng`` when given, otherwise from ``cfg.rng_seed``.
    Ties on error go to the filter with more inliers, then the lower index.
    """
    phi, rr = _split(points)
    n = len(phi)
    if n < 2:
        raise NotEnoughPoints(f"need at least 2 points, got {n}")
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    orders = random_orders(n, cfg.num_filters, rng)
    v, p, _, inl, rep, ninl = _kernels.rls_multi(
        phi, rr, orders, float(seed_v0[0]), float(seed_v0[1]), cfg.p0_scale,
        cfg.outlier_delta_threshold, cfg.warmup_updates)
    ok = ninl >= 2
    if not ok.any():
        raise Degenerate("no filter kept two inliers")
    errors = np.where(ok, rep, np.inf)
    # lexsort keys run last-to-first: error, then more inliers, then index
    best = int(np.lexsort((np.arange(len(errors)), -ninl, errors))[0])
    P = np.array([[p[best, 0], p[best, 1]], [p[best, 1], p[best, 2]]])
    return VelocityEstimate(
        (float(v[best, 0]), float(v[best, 1])), float(rep[best]), int(ninl[best]), best,
        (float(seed_v0[0]), float(seed_v0[1])), P, inl[best], tuple(errors.tolist()),
    )


def _lstsq(phi: np.ndarray, rr: np.ndarray) -> tuple[float, float]:
    c, s = np.cos(phi), np.sin(phi)
    a = np.array([[c @ c, c @ s], [c @ s, s @ s]])
    b = np.array([c @ rr, s @ rr])
    det = a[0, 0] * a[1, 1] - a[0, 1] ** 2
    if det <= 1e-12 * max(np.trace(a), 1e-300) ** 2:
        raise Degenerate("regressor matrix is rank deficient")
    v = np.linalg.solve(a, b)
    return float(v[0]), float(v[1])


def ols_baseline(points) -> tuple[float, float]:
    """Ordinary least squares over all points via the 2x2 normal equations."""
    phi, rr = _split(points)
    if len(phi) < 2:
        raise NotEnoughPoints(f"need at least 2 points, got {len(phi)}")
    return _lstsq(phi, rr)


def ransac_ols_baseline(points, iters: int = 50, inlier_tol: float = 0.3,
                        rng: np.random.Generator | int | None = 0) -> tuple[float, float]:
    """Two-point RANSAC on the Doppler model, best consensus refit with OLS.

    When there are no more point pairs than ``iters`` every pair is tried,
    which makes small clusters deterministic.
    """
    phi, rr = _split(points)
    n = len(phi)
    if n < 2:
        raise NotEnoughPoints(f"need at least 2 points, got {n}")
    c, s = np.cos(phi), np.sin(phi)
    if n * (n - 1) // 2 <= iters:
        samples = itertools.combinations(range(n), 2)
    else:
        gen = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        samples = (tuple(gen.choice(n, 2, replace=False)) for _ in range(iters))
    best_key, best_mask, best_v = None, None, None
    for i, j in samples:
        det = c[i] * s[j] - s[i] * c[j]
        if abs(det) < 1e-9:
            continue
        vx = (rr[i] * s[j] - rr[j] * s[i]) / det
        vy = (c[i] * rr[j] - c[j] * rr[i]) / det
        res = np.abs(rr - (c * vx + s * vy))
        mask = res <= inlier_tol
        key = (int(mask.sum()), -float(res[mask].sum()))
        if best_key is None or key > best_key:
            best_key, best_mask, best_v = key, mask, (float(vx), float(vy))
    if best_mask is None:
        raise Degenerate("no invertible two-point sample")
    try:
        return _lstsq(phi[best_mask], rr[best_mask])
    except Degenerate:
        return best_v
