"""Per-frame extended-object tracking pipeline.

compensate -> static filter -> accumulate -> cluster -> velocity ->
distortion correction -> associate -> track.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .clustering import Cluster, FlowField, NoFlow, dbscan, extreme_points_bbox, flow_field_from_dict
from .config import PipelineConfig
from .core_types import Frame, PointCloud, SensorMount
from .ego_comp import compensate_frame
from .preprocess import AccumulatedCloud, accumulate, correct_distortion, remove_static_cloud
from .tracker import Track, Tracker, heading_of
from .velocity import (
    VelocityError,
    axis_information,
    cah_seed,
    estimate_velocity,
    ols_baseline,
    ransac_ols_baseline,
)

log = logging.getLogger(__name__)


@dataclass
class FrameResult:
    frame_index: int
    t: float
    clusters: list[Cluster]
    tracks: list[Track]
    n_points: int
    n_dynamic: int
    degenerate: int
    velocity_ms: float
    pipeline_ms: float
    labels: np.ndarray = field(default=None, repr=False)


class Pipeline:
    """Stateful frame processor; feed frames strictly in order."""

    def __init__(self, cfg: PipelineConfig = PipelineConfig(),
                 mounts: Mapping[str, SensorMount] | None = None,
                 flow: FlowField | dict | None = None, seed: int = 0):
        self.cfg = cfg
        self.mounts = dict(mounts or {"front": SensorMount()})
        self.flow = flow_field_from_dict(flow) if isinstance(flow, dict) or flow is None else flow
        if flow is None:
            self.flow = NoFlow()
        self.seed = int(seed)
        self.acc = AccumulatedCloud(depth=cfg.preprocess.depth)
        self.tracker = Tracker(cfg.kf, cfg.rls)
        self._prev_centres: np.ndarray = np.zeros((0, 2))
        self._prev_time: float | None = None

    def _rng(self, frame_index: int) -> np.random.Generator:
        return np.random.default_rng([self.seed & 0xFFFFFFFFFFFFFFFF, int(frame_index), 1])

    def process(self, frame: Frame, labels=None) -> FrameResult:
        cfg = self.cfg
        t_start = time.perf_counter()
        rng = self._rng(frame.frame_index)
        cloud = compensate_frame(frame.points, frame.ego, self.mounts, frame.frame_index, labels)
        dyn = remove_static_cloud(cloud, cfg.preprocess.static_threshold)
        self.acc = accumulate(self.acc, dyn, frame.frame_index, frame.timestamp)
        merged = self.acc.merged()
        clusters, _ = dbscan(merged, cfg.dbscan, self.flow)

        t_vel = time.perf_counter()
        raw_centres = np.array([c.centre for c in clusters]).reshape(-1, 2)
        seeds = self._cah_seeds(raw_centres, frame.timestamp)
        window = self.acc.window[-cfg.velocity.window:] if cfg.velocity.window > 0 else None
        degenerate = 0
        for c, seed in zip(clusters, seeds):
            vc = c.cloud
            if window is not None:
                vc = c.cloud.select(np.isin(c.cloud.frame, window))
                if len(vc) < 2:
                    vc = c.cloud
            pts = np.column_stack([vc.phi, vc.rr])
            c.cah_seed = seed
            c.estimates["points"] = pts
            try:
                est = estimate_velocity(pts, seed if seed is not None else (0.0, 0.0), cfg.rls, rng)
            except VelocityError as exc:
                degenerate += 1
                log.debug("frame %d: velocity failed: %s", frame.frame_index, exc)
                continue
            c.estimates["rls"] = est.v
            c.inlier_count = est.inlier_count
            heading = self.flow.query(*c.centre)
            if heading is not None and (axis_information(pts[:, 0], heading)
                                        < cfg.velocity.min_flow_information):
                degenerate += 1
                c.estimates["degenerate"] = True
                continue
            c.velocity = est.v
        velocity_ms = (time.perf_counter() - t_vel) * 1e3

        baseline_s = 0.0
        if cfg.velocity.baselines:
            t_b = time.perf_counter()
            for c in clusters:
                self._baselines(c, rng)
            baseline_s = time.perf_counter() - t_b

        frame_times = self.acc.frame_times
        for i, c in enumerate(clusters):
            if c.velocity is None:
                continue
            c.cloud = correct_distortion(c.cloud, c.velocity, frame_times, frame.timestamp)
            yaw = heading_of(c.velocity, c.box.yaw, cfg.kf.heading_min_speed)
            c.box = extreme_points_bbox(np.column_stack([c.cloud.x, c.cloud.y]), yaw)

        self._prev_centres = raw_centres
        self._prev_time = frame.timestamp
        tracks = self.tracker.step(clusters, frame.timestamp, rng)
        pipeline_ms = (time.perf_counter() - t_start - baseline_s) * 1e3
        return FrameResult(frame.frame_index, frame.timestamp, clusters, tracks, len(cloud), len(dyn),
                           degenerate, velocity_ms, pipeline_ms, cloud.label)

    def _cah_seeds(self, centres: np.ndarray, t: float) -> list[tuple[float, float] | None]:
        if self._prev_time is None or len(self._prev_centres) == 0 or not t > self._prev_time:
            return [None] * len(centres)
        d = np.hypot(centres[:, None, 0] - self._prev_centres[None, :, 0],
                     centres[:, None, 1] - self._prev_centres[None, :, 1])
        nearest = np.argmin(d, axis=1) if len(centres) else np.zeros(0, dtype=int)
        out = []
        for i, j in enumerate(nearest):
            if d[i, j] <= self.cfg.velocity.cah_gate:
                out.append(cah_seed(centres[i], self._prev_centres[j], t, self._prev_time))
            else:
                out.append(None)
        return out

    def _baselines(self, c: Cluster, rng: np.random.Generator) -> None:
        pts = c.estimates["points"]
        for name, fn in (
            ("ols", lambda: ols_baseline(pts)),
            ("ransac", lambda: ransac_ols_baseline(pts, self.cfg.velocity.ransac_iters,
                                                  self.cfg.velocity.ransac_tol, rng)),
        ):
            try:
                c.estimates[name] = fn()
            except VelocityError:
                c.estimates[name] = None
        c.estimates["cah"] = c.cah_seed


def majority_label(cloud: PointCloud) -> int:
    """Most common ground-truth label among a cluster's points (-1 for clutter)."""
    if len(cloud) == 0:
        return -1
    vals, counts = np.unique(cloud.label, return_counts=True)
    return int(vals[np.argmax(counts)])


def speed(v) -> float:
    return math.hypot(v[0], v[1])
