"""Extended-object tracks: CV Kalman filter over (x, y, vx, vy, l, w) and lifecycle."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .association import DEFAULT_GATE_POS, DEFAULT_GATE_VEL, associate
from .clustering import Cluster, extreme_points_bbox
from .core_types import PointCloud
from .velocity import RlsConfig, VelocityError, estimate_velocity

STATE_DIM = 6


class TrackStatus(enum.Enum):
    INVALID = "invalid"
    VALID = "valid"


@dataclass(frozen=True)
class KfConfig:
    q_accel: float = 4.0  # white-acceleration spectral density, (m/s^2)^2 s
    q_extent: float = 0.01  # m^2/s random walk on l, w
    r: tuple[float, ...] = (0.16, 0.16, 0.25, 0.25, 0.25, 0.25)
    init_extent_var: float = 1.0
    confirm_hits: int = 3
    delete_misses: int = 5
    init_l: float = 4.0
    init_w: float = 2.0
    gate_pos: float = DEFAULT_GATE_POS
    gate_vel: float = DEFAULT_GATE_VEL
    heading_min_speed: float = 1.0

    def __post_init__(self):
        if len(self.r) != STATE_DIM or min(self.r) <= 0:
            raise ValueError("r needs six positive variances")
        if self.q_accel < 0 or self.q_extent < 0:
            raise ValueError("process noise must be non-negative")
        if self.confirm_hits < 1 or self.delete_misses < 1:
            raise ValueError("lifecycle counts must be >= 1")


@dataclass(frozen=True)
class Track:
    id: int
    state: np.ndarray
    cov: np.ndarray = field(repr=False)
    status: TrackStatus = TrackStatus.INVALID
    hits: int = 0
    misses: int = 0
    last_update: float = 0.0
    age: int = 0

    @property
    def position(self) -> tuple[float, float]:
        return float(self.state[0]), float(self.state[1])

    @property
    def velocity(self) -> tuple[float, float]:
        return float(self.state[2]), float(self.state[3])

    @property
    def extents(self) -> tuple[float, float]:
        return float(self.state[4]), float(self.state[5])


@dataclass(frozen=True)
class Measurement:
    x: float
    y: float
    vx: float
    vy: float
    l: float
    w: float
    fallback: bool = False
    yaw: float = 0.0

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy, self.l, self.w])


def transition(dt: float) -> np.ndarray:
    F = np.eye(STATE_DIM)
    F[0, 2] = F[1, 3] = dt
    return F


def process_noise(dt: float, cfg: KfConfig) -> np.ndarray:
    Q = np.zeros((STATE_DIM, STATE_DIM))
    q = cfg.q_accel
    blk = q * np.array([[dt ** 3 / 3, dt ** 2 / 2], [dt ** 2 / 2, dt]])
    for p, v in ((0, 2), (1, 3)):
        Q[np.ix_([p, v], [p, v])] = blk
    Q[4, 4] = Q[5, 5] = cfg.q_extent * dt
    return Q


def predict(track: Track, dt: float, cfg: KfConfig = KfConfig()) -> Track:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    F = transition(dt)
    cov = F @ track.cov @ F.T + process_noise(dt, cfg)
    return replace(track, state=F @ track.state, cov=(cov + cov.T) / 2)


def update(track: Track, meas, cfg: KfConfig = KfConfig()) -> Track:
    """Kalman measurement update with H = I (Joseph form)."""
    z = meas.vector() if isinstance(meas, Measurement) else np.asarray(meas, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValueError("measurement must be finite")
    R = np.diag(cfg.r)
    P = track.cov
    K = np.linalg.solve((P + R).T, P.T).T
    x = track.state + K @ (z - track.state)
    x[4:] = np.maximum(x[4:], 0.0)
    A = np.eye(STATE_DIM) - K
    cov = A @ P @ A.T + K @ R @ K.T
    return replace(track, state=x, cov=(cov + cov.T) / 2)


def new_track(track_id: int, centre, velocity, t: float, cfg: KfConfig = KfConfig()) -> Track:
    state = np.array([centre[0], centre[1], velocity[0], velocity[1], cfg.init_l, cfg.init_w], dtype=float)
    cov = np.diag(list(cfg.r[:4]) + [cfg.init_extent_var, cfg.init_extent_var])
    return Track(track_id, state, cov, last_update=t)


def heading_of(velocity, fallback: float, min_speed: float) -> float:
    vx, vy = velocity
    return math.atan2(vy, vx) if math.hypot(vx, vy) >= min_speed else fallback


def merge_clusters(clusters: Sequence[Cluster], rls_cfg: RlsConfig = RlsConfig(),
                   rng: np.random.Generator | None = None, heading_min_speed: float = 1.0
                   ) -> Measurement:
    """Pool clusters assigned to one track into a single measurement.

    Velocity is re-estimated on the pooled points, seeded with the
    inlier-weighted mean of the member velocities; if that fails the weighted
    mean itself is used and the measurement is flagged.
    """
    if not clusters:
        raise ValueError("need at least one cluster")
    if len(clusters) == 1:
        c = clusters[0]
        return Measurement(c.box.cx, c.box.cy, c.velocity[0], c.velocity[1],
                           c.box.length, c.box.width, yaw=c.box.yaw)
    wts = np.array([max(c.inlier_count, 1) for c in clusters], dtype=float)
    vels = np.array([c.velocity for c in clusters], dtype=float)
    seed = tuple((wts[:, None] * vels).sum(0) / wts.sum())
    pooled_vel = np.concatenate([velocity_points(c) for c in clusters])
    fallback = False
    try:
        est = estimate_velocity(pooled_vel, seed, rls_cfg, rng)
        v = est.v
    except VelocityError:
        v, fallback = seed, True
    geo = PointCloud.concat([c.cloud for c in clusters])
    yaw = heading_of(v, clusters[0].box.yaw, heading_min_speed)
    box = extreme_points_bbox(np.column_stack([geo.x, geo.y]), yaw)
    return Measurement(box.cx, box.cy, float(v[0]), float(v[1]), box.length, box.width, fallback, yaw)


def velocity_points(cluster: Cluster) -> np.ndarray:
    """(phi_w, r_dot) rows the velocity estimator used for this cluster."""
    vp = cluster.estimates.get("points")
    if vp is not None:
        return vp
    return np.column_stack([cluster.cloud.phi, cluster.cloud.rr])


class Tracker:
    """Owns the track list and advances it one frame at a time."""

    def __init__(self, cfg: KfConfig = KfConfig(), rls_cfg: RlsConfig = RlsConfig()):
        self.cfg = cfg
        self.rls_cfg = rls_cfg
        self.tracks: list[Track] = []
        self.next_id = 0
        self.time: float | None = None
        self.deleted: list[int] = []

    def valid_tracks(self) -> list[Track]:
        return [t for t in self.tracks if t.status is TrackStatus.VALID]

    def step(self, clusters: Sequence[Cluster], t: float,
             rng: np.random.Generator | None = None) -> list[Track]:
        cfg = self.cfg
        if self.time is not None:
            dt = t - self.time
            if dt > 0:
                self.tracks = [predict(tr, dt, cfg) for tr in self.tracks]
        self.time = t

        usable = [(i, c) for i, c in enumerate(clusters) if c.velocity is not None]
        res = associate([(tr.id, tr.state) for tr in self.tracks],
                        [(i, c.centre, c.velocity) for i, c in usable],
                        cfg.gate_pos, cfg.gate_vel)
        groups = res.tracks_with_clusters

        kept = []
        self.deleted = []
        for tr in self.tracks:
            cids = groups.get(tr.id)
            if cids:
                meas = merge_clusters([clusters[i] for i in cids], self.rls_cfg, rng,
                                      cfg.heading_min_speed)
                tr = update(tr, meas, cfg)
                hits = tr.hits + 1
                status = TrackStatus.VALID if hits >= cfg.confirm_hits else tr.status
                tr = replace(tr, hits=hits, misses=0, status=status, last_update=t, age=tr.age + 1)
            else:
                misses = tr.misses + 1
                if misses >= cfg.delete_misses:
                    self.deleted.append(tr.id)
                    continue
                tr = replace(tr, hits=0, misses=misses, age=tr.age + 1)
            kept.append(tr)

        for cid in res.unassigned_clusters:
            c = clusters[cid]
            kept.append(new_track(self.next_id, c.centre, c.velocity, t, cfg))
            self.next_id += 1
        self.tracks = kept
        return kept
