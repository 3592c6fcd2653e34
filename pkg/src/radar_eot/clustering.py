"""Traffic-flow-aware DBSCAN and bounding-box cluster geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import numpy as np
import yaml
from scipy.spatial import cKDTree

from . import _kernels
from .core_types import PointCloud, normalize_angle, normalize_angles


class FlowField(Protocol):
    def query(self, x: float, y: float) -> float | None: ...

    def query_many(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Directions for many points, nan where flow is undefined."""
        ...


class NoFlow:
    """Flow undefined everywhere: plain circular DBSCAN."""

    def query(self, x, y):
        return None

    def query_many(self, x, y):
        return np.full(np.shape(x), np.nan)


@dataclass(frozen=True)
class ConstantFlow:
    direction: float

    def query(self, x, y):
        return normalize_angle(self.direction)

    def query_many(self, x, y):
        return np.full(np.shape(x), normalize_angle(self.direction))


@dataclass(frozen=True)
class Region:
    xmin: float
    xmax: float
    ymin: float
    ymax: float
    direction: float | None


@dataclass(frozen=True)
class RegionFlow:
    """Axis-aligned rectangles; the first containing region wins."""

    regions: tuple[Region, ...]
    default: float | None = None

    def query(self, x, y):
        v = self.query_many(np.array([x]), np.array([y]))[0]
        return None if math.isnan(v) else float(v)

    def query_many(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.full(x.shape, np.nan if self.default is None else normalize_angle(self.default))
        done = np.zeros(x.shape, dtype=bool)
        for r in self.regions:
            m = ~done & (x >= r.xmin) & (x <= r.xmax) & (y >= r.ymin) & (y <= r.ymax)
            out[m] = np.nan if r.direction is None else normalize_angle(r.direction)
            done |= m
        return out


@dataclass(frozen=True)
class GridFlow:
    """Regular grid of directions; nan cells and cells off the grid are undefined."""

    origin: tuple[float, float]
    cell_size: float
    grid: np.ndarray = field(repr=False)  # (rows along y, cols along x)

    def query(self, x, y):
        v = self.query_many(np.array([x]), np.array([y]))[0]
        return None if math.isnan(v) else float(v)

    def query_many(self, x, y):
        col = np.floor((np.asarray(x, dtype=float) - self.origin[0]) / self.cell_size).astype(np.int64)
        row = np.floor((np.asarray(y, dtype=float) - self.origin[1]) / self.cell_size).astype(np.int64)
        nr, nc = self.grid.shape
        ok = (row >= 0) & (row < nr) & (col >= 0) & (col < nc)
        out = np.full(col.shape, np.nan)
        out[ok] = normalize_angles(self.grid[row[ok], col[ok]])
        return out

    @classmethod
    def from_path(cls, xs, ys, headings, lane_halfwidth: float = 6.0, cell_size: float = 1.0,
                  margin: float = 10.0) -> "GridFlow":
        """Rasterise a sampled centre-line: cells near the path take its heading."""
        xs, ys, headings = (np.asarray(a, dtype=float) for a in (xs, ys, headings))
        x0, y0 = xs.min() - margin, ys.min() - margin
        nc = int(math.ceil((xs.max() + margin - x0) / cell_size))
        nr = int(math.ceil((ys.max() + margin - y0) / cell_size))
        cx = x0 + (np.arange(nc) + 0.5) * cell_size
        cy = y0 + (np.arange(nr) + 0.5) * cell_size
        gx, gy = np.meshgrid(cx, cy)
        d, i = cKDTree(np.column_stack([xs, ys])).query(np.column_stack([gx.ravel(), gy.ravel()]))
        grid = np.where(d <= lane_halfwidth, headings[i], np.nan).reshape(nr, nc)
        return cls((x0, y0), cell_size, grid)


def load_flow_field(path: str | Path) -> FlowField:
    """Read a flow-field YAML file.

    Directions are radians, counter-clockwise from the world x axis; ``null``
    marks places where flow is undefined (circular neighbourhoods are used
    there). One of::

        type: none

        type: constant
        direction: 1.5708

        type: regions            # first matching rectangle wins
        default: null            # used outside every region
        regions:
          - {xmin: 0, xmax: 100, ymin: -2, ymax: 2, direction: 0.0}
          - {xmin: 0, xmax: 100, ymin: 2, ymax: 6, direction: 3.1416}

        type: grid               # rows run along +y, columns along +x
        origin: [-10.0, -10.0]   # lower-left corner of cell (0, 0)
        cell_size: 1.0
        rows:
          - [0.0, 0.0, null]
          - [0.0, 0.0, 0.0]

        type: path               # sampled lane centre-line, rasterised to a grid
        x: [...]
        y: [...]
        heading: [...]
        lane_halfwidth: 6.0
        cell_size: 1.0
    """
    with open(path) as fh:
        doc = yaml.safe_load(fh)
    return flow_field_from_dict(doc)


def flow_field_from_dict(doc: dict | None) -> FlowField:
    if doc is None:
        return NoFlow()
    kind = doc.get("type", "none")
    if kind == "none":
        return NoFlow()
    if kind == "constant":
        return ConstantFlow(float(doc["direction"]))
    if kind == "regions":
        regions = tuple(
            Region(float(r["xmin"]), float(r["xmax"]), float(r["ymin"]), float(r["ymax"]),
                   None if r.get("direction") is None else float(r["direction"]))
            for r in doc.get("regions", [])
        )
        default = doc.get("default")
        return RegionFlow(regions, None if default is None else float(default))
    if kind == "path":
        return GridFlow.from_path(doc["x"], doc["y"], doc["heading"],
                                  float(doc.get("lane_halfwidth", 6.0)), float(doc.get("cell_size", 1.0)))
    if kind == "grid":
        rows = [[np.nan if v is None else float(v) for v in row] for row in doc["rows"]]
        return GridFlow(tuple(map(float, doc["origin"])), float(doc["cell_size"]), np.array(rows, dtype=float))
    raise ValueError(f"unknown flow field type {kind!r}")


@dataclass(frozen=True)
class DbscanParams:
    semi_major: float = 2.5
    semi_minor: float = 1.0
    circle_radius: float = 1.5
    min_pts: int = 2

    def __post_init__(self):
        if not (self.semi_major >= self.semi_minor > 0):
            raise ValueError("need semi_major >= semi_minor > 0")
        if self.circle_radius <= 0:
            raise ValueError("circle_radius must be positive")
        if self.min_pts < 1:
            raise ValueError("min_pts must be >= 1")


def _inside(dx, dy, theta, params: DbscanParams):
    """Is offset (dx, dy) inside the neighbourhood of a point with flow ``theta``?"""
    circ = dx * dx + dy * dy <= params.circle_radius ** 2
    c, s = np.cos(theta), np.sin(theta)
    u = dx * c + dy * s
    w = -dx * s + dy * c
    ell = (u / params.semi_major) ** 2 + (w / params.semi_minor) ** 2 <= 1.0
    return np.where(np.isnan(theta), circ, ell)


def neighbour_pairs(x, y, params: DbscanParams, flow: FlowField):
    """Symmetric neighbour pairs ``(i, j)`` with ``i < j``.

    A pair counts only when each point lies in the other's neighbourhood.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    reach = max(params.semi_major, params.circle_radius)
    pairs = cKDTree(np.column_stack([x, y])).query_pairs(reach * (1 + 1e-9), output_type="ndarray")
    if len(pairs) == 0:
        return pairs.astype(np.int64)
    theta = flow.query_many(x, y)
    i, j = pairs[:, 0], pairs[:, 1]
    dx, dy = x[j] - x[i], y[j] - y[i]
    ok = _inside(dx, dy, theta[i], params) & _inside(-dx, -dy, theta[j], params)
    return pairs[ok].astype(np.int64)


def dbscan_labels(x, y, params: DbscanParams, flow: FlowField | None = None) -> np.ndarray:
    """DBSCAN labels (noise -1), clusters numbered by lowest member index."""
    flow = flow or NoFlow()
    n = len(x)
    pairs = neighbour_pairs(x, y, params, flow)
    both = np.concatenate([pairs, pairs[:, ::-1]]) if len(pairs) else np.zeros((0, 2), dtype=np.int64)
    order = np.lexsort((both[:, 1], both[:, 0])) if len(both) else np.zeros(0, dtype=np.int64)
    both = both[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(both[:, 0], minlength=n), out=indptr[1:])
    return _kernels.dbscan_expand(n, indptr, both[:, 1].copy(), params.min_pts)


@dataclass(frozen=True)
class OrientedBox:
    cx: float
    cy: float
    length: float
    width: float
    yaw: float

    @property
    def centre(self) -> tuple[float, float]:
        return (self.cx, self.cy)

    def corners(self) -> np.ndarray:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        hl, hw = self.length / 2, self.width / 2
        local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
        rot = np.array([[c, -s], [s, c]])
        return local @ rot.T + [self.cx, self.cy]

    def contains(self, x, y, tol: float = 1e-9) -> np.ndarray:
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx, dy = np.asarray(x) - self.cx, np.asarray(y) - self.cy
        u = dx * c + dy * s
        w = -dx * s + dy * c
        return (np.abs(u) <= self.length / 2 + tol) & (np.abs(w) <= self.width / 2 + tol)


def extreme_points_bbox(points, orientation: float) -> OrientedBox:
    """Tightest rectangle at yaw ``orientation`` around ``points`` (N x 2)."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("cannot bound an empty point set")
    c, s = math.cos(orientation), math.sin(orientation)
    u = pts[:, 0] * c + pts[:, 1] * s
    w = -pts[:, 0] * s + pts[:, 1] * c
    umin, umax, wmin, wmax = u.min(), u.max(), w.min(), w.max()
    um, wm = (umin + umax) / 2, (wmin + wmax) / 2
    return OrientedBox(um * c - wm * s, um * s + wm * c, umax - umin, wmax - wmin, orientation)


@dataclass
class Cluster:
    """Points grouped by DBSCAN together with their derived geometry.

    ``velocity`` is the RLS estimate once computed; ``estimates`` collects the
    baseline algorithms run on the same points.
    """

    cloud: PointCloud
    box: OrientedBox
    velocity: tuple[float, float] | None = None
    cah_seed: tuple[float, float] | None = None
    inlier_count: int = 0
    estimates: dict = field(default_factory=dict)

    @property
    def centre(self) -> tuple[float, float]:
        return self.box.centre

    @property
    def points(self) -> list[tuple[tuple[float, float, float, float], int]]:
        """Member points as ``((x, y, range_rate_comp, phi_w), source_frame)``."""
        c = self.cloud
        return [((float(a), float(b), float(r), float(p)), int(f))
                for a, b, r, p, f in zip(c.x, c.y, c.rr, c.phi, c.frame)]

    def __len__(self) -> int:
        return len(self.cloud)


def box_orientation(cloud: PointCloud, flow: FlowField | None) -> float:
    """Flow direction at the point centroid, or 0 when flow is undefined there."""
    if flow is None or len(cloud) == 0:
        return 0.0
    d = flow.query(float(cloud.x.mean()), float(cloud.y.mean()))
    return 0.0 if d is None else d


def make_cluster(cloud: PointCloud, orientation: float) -> Cluster:
    box = extreme_points_bbox(np.column_stack([cloud.x, cloud.y]), orientation)
    return Cluster(cloud, box)


def cluster_centre(cluster: Cluster) -> tuple[float, float]:
    """Centre of the cluster's bounding box (not the point centroid)."""
    return cluster.box.centre


def dbscan(cloud: PointCloud, params: DbscanParams, flow: FlowField | None = None
           ) -> tuple[list[Cluster], PointCloud]:
    """Cluster a cloud; returns clusters and the noise points."""
    labels = dbscan_labels(cloud.x, cloud.y, params, flow)
    clusters = []
    for lab in range(int(labels.max()) + 1 if len(labels) else 0):
        sub = cloud.select(labels == lab)
        clusters.append(make_cluster(sub, box_orientation(sub, flow)))
    return clusters, cloud.select(labels < 0)

