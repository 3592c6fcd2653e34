"""Shared domain types and angle helpers.

Angles are radians everywhere, counter-clockwise positive, and wrapped into
(-pi, pi]. Point positions live in the world frame once ingested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap ``a`` into (-pi, pi]."""
    r = math.remainder(a, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def normalize_angles(a: np.ndarray) -> np.ndarray:
    """Vectorised :func:`normalize_angle`."""
    r = np.remainder(np.asarray(a, dtype=float) + math.pi, TWO_PI) - math.pi
    r[r <= -math.pi] += TWO_PI
    return r


@dataclass(frozen=True)
class RadarPoint:
    """One radar reflection, position already in the world frame."""

    x_w: float
    y_w: float
    range_rate_meas: float
    bearing_sensor: float
    timestamp: float
    sensor_id: str = "front"

    def __post_init__(self):
        if not (-math.pi < self.bearing_sensor <= math.pi):
            raise ValueError(f"bearing_sensor {self.bearing_sensor} outside (-pi, pi]")
        if not math.isfinite(self.timestamp) or self.timestamp < 0:
            raise ValueError(f"invalid timestamp {self.timestamp}")


@dataclass(frozen=True)
class SensorMount:
    """Sensor pose in the ego-vehicle frame."""

    x_s: float = 0.0
    y_s: float = 0.0
    theta_s: float = 0.0

    def __post_init__(self):
        if not (-math.pi < self.theta_s <= math.pi):
            raise ValueError(f"theta_s {self.theta_s} outside (-pi, pi]")


@dataclass(frozen=True)
class EgoState:
    """Ego pose in the world and its motion.

    ``vx_e``/``vy_e`` are world-aligned, ``omega_e`` is the yaw rate.
    """

    x_e: float = 0.0
    y_e: float = 0.0
    alpha: float = 0.0
    vx_e: float = 0.0
    vy_e: float = 0.0
    omega_e: float = 0.0
    timestamp: float = 0.0

    def __post_init__(self):
        if not (-math.pi < self.alpha <= math.pi):
            raise ValueError(f"alpha {self.alpha} outside (-pi, pi]")

    def sensor_position(self, mount: SensorMount) -> tuple[float, float]:
        """World position of a sensor mounted on this vehicle."""
        c, s = math.cos(self.alpha), math.sin(self.alpha)
        return (
            self.x_e + c * mount.x_s - s * mount.y_s,
            self.y_e + s * mount.x_s + c * mount.y_s,
        )


@dataclass(frozen=True)
class WorldBearing:
    phi_w: float

    def __post_init__(self):
        if not (-math.pi < self.phi_w <= math.pi):
            raise ValueError(f"phi_w {self.phi_w} outside (-pi, pi]")

    def __float__(self) -> float:
        return self.phi_w


@dataclass(frozen=True)
class Frame:
    """All points of one radar scan plus the matching ego state."""

    points: tuple[RadarPoint, ...]
    ego: EgoState
    timestamp: float
    frame_index: int

    def __post_init__(self):
        for p in self.points:
            if p.timestamp != self.timestamp:
                raise ValueError(
                    f"point timestamp {p.timestamp} != frame timestamp {self.timestamp}"
                )


def bearing_to_world(phi_s: float, mount: SensorMount, ego: EgoState) -> WorldBearing:
    """World-frame bearing: sensor bearing + mount yaw + ego yaw, wrapped."""
    return WorldBearing(normalize_angle(phi_s + mount.theta_s + ego.alpha))


@dataclass
class PointCloud:
    """Struct-of-arrays view of compensated points used inside the pipeline.

    ``label`` carries simulator ground truth (target id, -1 for clutter) and is
    never read by the estimation code.
    """

    x: np.ndarray
    y: np.ndarray
    rr: np.ndarray
    phi: np.ndarray
    t: np.ndarray
    frame: np.ndarray
    label: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.label is None:
            self.label = np.full(len(self.x), -1, dtype=np.int64)

    def __len__(self) -> int:
        return len(self.x)

    @classmethod
    def empty(cls) -> "PointCloud":
        z = np.zeros(0)
        return cls(z, z.copy(), z.copy(), z.copy(), z.copy(), np.zeros(0, dtype=np.int64))

    def select(self, idx) -> "PointCloud":
        return PointCloud(
            self.x[idx], self.y[idx], self.rr[idx], self.phi[idx],
            self.t[idx], self.frame[idx], self.label[idx],
        )

    @classmethod
    def concat(cls, clouds: Sequence["PointCloud"]) -> "PointCloud":
        if not clouds:
            return cls.empty()
        return cls(*(np.concatenate([getattr(c, f) for c in clouds])
                     for f in ("x", "y", "rr", "phi", "t", "frame", "label")))
