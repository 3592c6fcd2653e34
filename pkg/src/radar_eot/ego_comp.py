"""Ego-motion compensation of measured range rates."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core_types import (
    EgoState,
    PointCloud,
    RadarPoint,
    SensorMount,
    bearing_to_world,
    normalize_angles,
)


class EgoSyncError(ValueError):
    """No ego state close enough in time to a radar frame."""


@dataclass(frozen=True)
class SensorMotion:
    """Rigid-body motion of the vehicle evaluated at the sensor (world-aligned)."""

    omega_s: float
    vx_s: float
    vy_s: float


@dataclass(frozen=True)
class CompensatedPoint:
    base: RadarPoint
    range_rate_comp: float
    phi_w: float


def motion_at_sensor(ego: EgoState, mount: SensorMount) -> SensorMotion:
    # lever arm taken between world positions of sensor and ego origin
    xs, ys = ego.sensor_position(mount)
    dx, dy = xs - ego.x_e, ys - ego.y_e
    w = ego.omega_e
    return SensorMotion(w, -dy * w + ego.vx_e, dx * w + ego.vy_e)


def ego_range_rate(sm: SensorMotion, mount: SensorMount, phi_s: float, alpha: float = 0.0) -> float:
    """Sensor velocity projected on the line of sight.

    ``sm`` is world-aligned, so the line of sight is rotated by the ego yaw
    ``alpha`` as well as the mount yaw. With ``alpha=0`` this is the plain
    ego-frame projection.
    """
    a = mount.theta_s + phi_s + alpha
    return sm.vx_s * math.cos(a) + sm.vy_s * math.sin(a)


def compensate(point: RadarPoint, ego: EgoState, mount: SensorMount) -> CompensatedPoint:
    sm = motion_at_sensor(ego, mount)
    rr_e = ego_range_rate(sm, mount, point.bearing_sensor, ego.alpha)
    phi_w = bearing_to_world(point.bearing_sensor, mount, ego).phi_w
    return CompensatedPoint(point, point.range_rate_meas + rr_e, phi_w)


def compensate_arrays(
    rr_meas: np.ndarray,
    phi_s: np.ndarray,
    ego: EgoState,
    mount: SensorMount,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`compensate` for points from a single sensor.

    Returns ``(range_rate_comp, phi_w)``.
    """
    sm = motion_at_sensor(ego, mount)
    los = np.asarray(phi_s, dtype=float) + mount.theta_s + ego.alpha
    rr = np.asarray(rr_meas, dtype=float) + sm.vx_s * np.cos(los) + sm.vy_s * np.sin(los)
    return rr, normalize_angles(los)


def compensate_frame(
    points: Sequence[RadarPoint],
    ego: EgoState,
    mounts: Mapping[str, SensorMount],
    frame_index: int,
    labels: Sequence[int] | None = None,
) -> PointCloud:
    """Compensate a whole frame into the pipeline's array representation."""
    n = len(points)
    x = np.fromiter((p.x_w for p in points), float, n)
    y = np.fromiter((p.y_w for p in points), float, n)
    rr = np.fromiter((p.range_rate_meas for p in points), float, n)
    phs = np.fromiter((p.bearing_sensor for p in points), float, n)
    t = np.fromiter((p.timestamp for p in points), float, n)
    rr_c = np.empty(n)
    phi = np.empty(n)
    sensor_ids = np.array([p.sensor_id for p in points], dtype=object)
    for sid in set(sensor_ids):
        try:
            mount = mounts[sid]
        except KeyError:
            raise KeyError(f"no mount configured for sensor {sid!r}") from None
        m = sensor_ids == sid
        rr_c[m], phi[m] = compensate_arrays(rr[m], phs[m], ego, mount)
    lab = None if labels is None else np.asarray(labels, dtype=np.int64)
    return PointCloud(x, y, rr_c, phi, t, np.full(n, frame_index, dtype=np.int64), lab)


def match_ego(states: Sequence[EgoState], t: float, max_skew: float = 0.010) -> EgoState:
    """Nearest ego state to ``t``; ``states`` must be sorted by timestamp."""
    if not states:
        raise EgoSyncError("no ego states available")
    times = [s.timestamp for s in states]
    i = bisect.bisect_left(times, t)
    best = min(
        (j for j in (i - 1, i) if 0 <= j < len(states)),
        key=lambda j: abs(times[j] - t),
    )
    if abs(times[best] - t) > max_skew:
        raise EgoSyncError(
            f"nearest ego state at t={times[best]:.4f}s is {abs(times[best] - t) * 1e3:.1f} ms "
            f"from frame t={t:.4f}s (max {max_skew * 1e3:.1f} ms)"
        )
    return states[best]
