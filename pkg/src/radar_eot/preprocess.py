"""Static-point removal, multi-frame accumulation and motion-distortion correction."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core_types import PointCloud
from .ego_comp import CompensatedPoint

DEFAULT_STATIC_THRESHOLD = 0.5
DEFAULT_DEPTH = 3


def is_dynamic(range_rate_comp, threshold: float = DEFAULT_STATIC_THRESHOLD):
    """True where ``|range_rate_comp| >= threshold`` (boundary kept)."""
    return np.abs(range_rate_comp) >= threshold


def remove_static(
    points: Sequence[CompensatedPoint], threshold: float = DEFAULT_STATIC_THRESHOLD
) -> list[CompensatedPoint]:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return [p for p in points if is_dynamic(p.range_rate_comp, threshold)]


def remove_static_cloud(cloud: PointCloud, threshold: float = DEFAULT_STATIC_THRESHOLD) -> PointCloud:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    return cloud.select(is_dynamic(cloud.rr, threshold))


@dataclass(frozen=True)
class AccumulatedCloud:
    """The ``depth`` most recent frames of dynamic points.

    Updating returns a new value; the instance itself is never mutated.
    """

    frames: tuple[tuple[int, float, PointCloud], ...] = ()
    depth: int = DEFAULT_DEPTH

    @property
    def window(self) -> tuple[int, ...]:
        return tuple(f[0] for f in self.frames)

    @property
    def reference_time(self) -> float | None:
        return self.frames[-1][1] if self.frames else None

    @property
    def frame_times(self) -> dict[int, float]:
        return {idx: t for idx, t, _ in self.frames}

    def merged(self) -> PointCloud:
        return PointCloud.concat([c for _, _, c in self.frames])

    def __len__(self) -> int:
        return sum(len(c) for _, _, c in self.frames)


def accumulate(
    cloud: AccumulatedCloud, new_frame: PointCloud, frame_index: int, timestamp: float
) -> AccumulatedCloud:
    if cloud.frames and frame_index <= cloud.frames[-1][0]:
        raise ValueError(
            f"frame index {frame_index} not after current window end {cloud.frames[-1][0]}"
        )
    frames = cloud.frames + ((frame_index, timestamp, new_frame),)
    return AccumulatedCloud(frames[-cloud.depth:], cloud.depth)


def correct_distortion(
    cloud: PointCloud,
    velocity: tuple[float, float],
    frame_times: Mapping[int, float],
    reference_time: float,
) -> PointCloud:
    """Move every point forward to ``reference_time`` along ``velocity``.

    A point seen at ``t1`` is shifted by ``v * (reference_time - t1)``, so points
    of the newest frame stay where they are.
    """
    missing = set(np.unique(cloud.frame).tolist()) - set(frame_times)
    if missing:
        raise KeyError(f"no timestamp for source frame(s) {sorted(missing)}")
    lookup = np.array([frame_times[int(f)] for f in cloud.frame], dtype=float)
    dt = reference_time - lookup
    out = cloud.select(slice(None))
    out.x = cloud.x + velocity[0] * dt
    out.y = cloud.y + velocity[1] * dt
    return out
