"""Synthetic radar scenarios with ground truth.

Targets are rigid rectangles moving along piecewise line/arc paths with a
piecewise-linear speed profile. Reflections are sampled on the edges facing
each sensor; the measured range rate is the target's radial speed minus the
sensor's own, so ego compensation recovers the truth exactly when noise is off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .core_types import EgoState, Frame, RadarPoint, SensorMount, normalize_angle
from .ego_comp import motion_at_sensor

CLUTTER = -1


@dataclass(frozen=True)
class SensorModel:
    """Radar characteristics.

    ``pos_resolution`` is carried for reference (it sets the tracker's default
    position noise); point spacing on a target is governed by ``separation``.
    """

    range_sigma: float = 0.1
    pos_resolution: float = 0.4
    separation: float = 0.6
    doppler_sigma: float = 0.12
    fov: float = math.radians(120.0)
    max_range: float = 100.0
    min_range: float = 1.0
    frame_rate: float = 14.0

    def __post_init__(self):
        if min(self.pos_resolution, self.separation, self.fov, self.max_range, self.frame_rate) <= 0:
            raise ValueError("sensor parameters must be positive")
        if self.range_sigma < 0 or self.doppler_sigma < 0:
            raise ValueError("noise sigmas must be non-negative")
        if not 0 <= self.min_range < self.max_range:
            raise ValueError("need 0 <= min_range < max_range")

    def noiseless(self) -> "SensorModel":
        return replace(self, range_sigma=0.0, doppler_sigma=0.0)


@dataclass(frozen=True)
class NoiseModel:
    outlier_prob: float = 0.3
    outlier_offset: tuple[float, float] = (1.0, 6.0)  # |offset| ~ U(lo, hi), random sign
    dropout_prob: float = 0.0
    clutter_rate: float = 0.0
    clutter_speed: tuple[float, float] = (0.5, 10.0)
    ego_velocity_sigma: float = 0.0

    def __post_init__(self):
        for p in (self.outlier_prob, self.dropout_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")
        if self.clutter_rate < 0 or self.ego_velocity_sigma < 0:
            raise ValueError("rates and sigmas must be non-negative")
        if not 0 <= self.outlier_offset[0] <= self.outlier_offset[1]:
            raise ValueError("outlier_offset must be an ordered non-negative range")


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float
    vx: float = 0.0
    vy: float = 0.0
    yaw_rate: float = 0.0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


class Path:
    """Chain of ``("line", length)`` and ``("arc", radius, angle)`` segments.

    Arc ``angle`` is signed (positive turns left). Closed paths wrap the arc
    length.
    """

    def __init__(self, start: Sequence[float], segments: Sequence[tuple], closed: bool = False):
        self.start = tuple(float(v) for v in start)
        self.segments = [tuple(s) for s in segments]
        self.closed = closed
        self._starts = []
        self._cum = [0.0]
        x, y, h = self.start
        for seg in self.segments:
            self._starts.append((x, y, h))
            x, y, h = self._advance(seg, x, y, h, self._seg_len(seg))
            self._cum.append(self._cum[-1] + self._seg_len(seg))
        self.end = (x, y, h)

    @staticmethod
    def _seg_len(seg) -> float:
        if seg[0] == "line":
            return float(seg[1])
        if seg[0] == "arc":
            return abs(float(seg[1]) * float(seg[2]))
        raise ValueError(f"unknown segment kind {seg[0]!r}")

    @staticmethod
    def _advance(seg, x, y, h, d):
        if seg[0] == "line":
            return x + d * math.cos(h), y + d * math.sin(h), h
        r, ang = float(seg[1]), float(seg[2])
        k = math.copysign(1.0 / r, ang)
        dh = k * d
        # exact circular arc
        return (x + (math.sin(h + dh) - math.sin(h)) / k,
                y - (math.cos(h + dh) - math.cos(h)) / k,
                h + dh)

    @property
    def length(self) -> float:
        return self._cum[-1]

    def pose(self, s: float) -> tuple[float, float, float, float]:
        """``(x, y, heading, curvature)`` at arc length ``s``."""
        if self.closed:
            s = s % self.length
        if s <= 0:
            x, y, h = self.start
            return x, y, h, 0.0
        if s >= self.length:
            # extend the last heading in a straight line
            x, y, h = self.end
            d = s - self.length
            return x + d * math.cos(h), y + d * math.sin(h), h, 0.0
        i = int(np.searchsorted(self._cum, s, side="right")) - 1
        seg = self.segments[i]
        x, y, h = self._advance(seg, *self._starts[i], s - self._cum[i])
        k = 0.0 if seg[0] == "line" else math.copysign(1.0 / float(seg[1]), float(seg[2]))
        return x, y, h, k

    def sample(self, step: float = 1.0):
        s = np.arange(0.0, self.length, step)
        pts = np.array([self.pose(v)[:3] for v in s])
        return pts[:, 0], pts[:, 1], pts[:, 2]


class SpeedProfile:
    """Speed linearly interpolated between ``(t, v)`` knots, held outside them."""

    def __init__(self, knots: Sequence[tuple[float, float]]):
        k = sorted((float(t), float(v)) for t, v in knots)
        if not k:
            raise ValueError("speed profile needs at least one knot")
        if any(v < 0 for _, v in k):
            raise ValueError("speeds must be non-negative")
        self.t = np.array([t for t, _ in k])
        self.v = np.array([v for _, v in k])
        seg = np.diff(self.t) * (self.v[:-1] + self.v[1:]) / 2
        self._dist = np.concatenate([[0.0], np.cumsum(seg)])

    def speed(self, t: float) -> float:
        return float(np.interp(t, self.t, self.v))

    def accel(self, t: float) -> float:
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        if i < 0 or i >= len(self.t) - 1:
            return 0.0
        return float((self.v[i + 1] - self.v[i]) / (self.t[i + 1] - self.t[i]))

    def distance(self, t: float) -> float:
        """Arc length travelled since ``t = 0``."""
        return self._integral(t) - self._integral(0.0)

    def _integral(self, t: float) -> float:
        if t <= self.t[0]:
            return (t - self.t[0]) * self.v[0]
        if t >= self.t[-1]:
            return self._dist[-1] + (t - self.t[-1]) * self.v[-1]
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        dt = t - self.t[i]
        return self._dist[i] + dt * (self.v[i] + self.speed(t)) / 2


@dataclass
class Trajectory:
    path: Path | None = None
    profile: SpeedProfile | None = None
    s0: float = 0.0
    static_pose: tuple[float, float, float] | None = None

    @classmethod
    def static(cls, x: float, y: float, heading: float = 0.0) -> "Trajectory":
        return cls(static_pose=(x, y, heading))

    def state(self, t: float) -> Pose:
        if self.static_pose is not None:
            x, y, h = self.static_pose
            return Pose(x, y, normalize_angle(h))
        s = self.s0 + self.profile.distance(t)
        x, y, h, k = self.path.pose(s)
        v = self.profile.speed(t)
        return Pose(x, y, normalize_angle(h), v * math.cos(h), v * math.sin(h), v * k)


@dataclass
class Target:
    id: int
    length: float
    width: float
    trajectory: Trajectory


@dataclass(frozen=True)
class TargetTruth:
    id: int
    x: float
    y: float
    heading: float
    vx: float
    vy: float
    yaw_rate: float
    length: float
    width: float

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass
class Scenario:
    label: str
    ego: Trajectory
    targets: list[Target]
    duration: float
    mounts: dict[str, SensorMount] = field(default_factory=lambda: {"front": SensorMount(2.0, 0.0, 0.0)})
    sensor: SensorModel = field(default_factory=SensorModel)
    noise: NoiseModel = field(default_factory=NoiseModel)
    flow: dict | None = None  # flow-field description, see clustering.flow_field_from_dict

    def frame_times(self) -> np.ndarray:
        n = int(math.floor(self.duration * self.sensor.frame_rate + 1e-9)) + 1
        return np.arange(n) / self.sensor.frame_rate

    def ego_state(self, t: float) -> EgoState:
        p = self.ego.state(t)
        return EgoState(p.x, p.y, p.heading, p.vx, p.vy, p.yaw_rate, t)

    def truth(self, t: float) -> list[TargetTruth]:
        out = []
        for tg in self.targets:
            p = tg.trajectory.state(t)
            out.append(TargetTruth(tg.id, p.x, p.y, p.heading, p.vx, p.vy, p.yaw_rate, tg.length, tg.width))
        return out


@dataclass
class SimFrame:
    frame: Frame
    labels: np.ndarray  # target id per point, -1 for clutter
    outlier: np.ndarray  # bool per point
    point_velocity: np.ndarray  # true world velocity of each reflection (N x 2)
    truth: list[TargetTruth]


def rect_corners(cx, cy, heading, length, width) -> np.ndarray:
    """Corners counter-clockwise starting at front-left."""
    c, s = math.cos(heading), math.sin(heading)
    hl, hw = length / 2, width / 2
    local = np.array([[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]])
    return local @ np.array([[c, s], [-s, c]]) + [cx, cy]


def visible_surface_points(corners: np.ndarray, sensor_xy, separation: float) -> np.ndarray:
    """Points on the edges facing the sensor, evenly spaced at >= ``separation``.

    Both end corners of every visible edge are included.
    """
    pts = []
    sx, sy = sensor_xy
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        e = b - a
        normal = np.array([e[1], -e[0]])  # outward for counter-clockwise corners
        mid = (a + b) / 2
        if (sx - mid[0]) * normal[0] + (sy - mid[1]) * normal[1] <= 0:
            continue
        m = max(1, int(math.floor(np.hypot(*e) / separation + 1e-9)))
        f = np.arange(m + 1) / m
        pts.append(a + f[:, None] * e)
    if not pts:
        return np.zeros((0, 2))
    allp = np.concatenate(pts)
    _, keep = np.unique(np.round(allp, 9), axis=0, return_index=True)
    return allp[np.sort(keep)]


def generate_frame(scenario: Scenario, t: float, frame_index: int = 0,
                   sensor: SensorModel | None = None, noise: NoiseModel | None = None,
                   rng: np.random.Generator | None = None) -> SimFrame:
    """Simulate one radar scan of ``scenario`` at time ``t``."""
    sensor = sensor or scenario.sensor
    noise = noise or scenario.noise
    rng = rng if rng is not None else np.random.default_rng(frame_index)
    ego = scenario.ego_state(t)
    truth = scenario.truth(t)
    points: list[RadarPoint] = []
    labels, outl, pvel = [], [], []

    if noise.ego_velocity_sigma > 0:
        # the pipeline sees a perturbed ego velocity, the physics uses the true one
        reported = replace(ego, vx_e=ego.vx_e + rng.normal(0, noise.ego_velocity_sigma),
                           vy_e=ego.vy_e + rng.normal(0, noise.ego_velocity_sigma))
    else:
        reported = ego

    for sid, mount in scenario.mounts.items():
        sx, sy = ego.sensor_position(mount)
        sm = motion_at_sensor(ego, mount)
        yaw_s = ego.alpha + mount.theta_s
        for tr in truth:
            corners = rect_corners(tr.x, tr.y, tr.heading, tr.length, tr.width)
            for px, py in visible_surface_points(corners, (sx, sy), sensor.separation):
                dx, dy = px - sx, py - sy
                rng_true = math.hypot(dx, dy)
                if not sensor.min_range <= rng_true <= sensor.max_range:
                    continue
                if abs(normalize_angle(math.atan2(dy, dx) - yaw_s)) > sensor.fov / 2:
                    continue
                if noise.dropout_prob and rng.random() < noise.dropout_prob:
                    continue
                vpx = tr.vx - tr.yaw_rate * (py - tr.y)
                vpy = tr.vy + tr.yaw_rate * (px - tr.x)
                ux, uy = dx / rng_true, dy / rng_true
                rr = (vpx - sm.vx_s) * ux + (vpy - sm.vy_s) * uy
                if sensor.doppler_sigma:
                    rr += rng.normal(0, sensor.doppler_sigma)
                is_out = bool(noise.outlier_prob and rng.random() < noise.outlier_prob)
                if is_out:
                    rr += rng.choice((-1.0, 1.0)) * rng.uniform(*noise.outlier_offset)
                mx, my = px, py
                if sensor.range_sigma:
                    mx += rng.normal(0, sensor.range_sigma)
                    my += rng.normal(0, sensor.range_sigma)
                bearing = normalize_angle(math.atan2(my - sy, mx - sx) - yaw_s)
                points.append(RadarPoint(mx, my, rr, bearing, t, sid))
                labels.append(tr.id)
                outl.append(is_out)
                pvel.append((vpx, vpy))

        n_clutter = rng.poisson(noise.clutter_rate) if noise.clutter_rate else 0
        for _ in range(n_clutter):
            r = rng.uniform(max(sensor.min_range, 1.0), sensor.max_range)
            b = rng.uniform(-sensor.fov / 2, sensor.fov / 2)
            a = yaw_s + b
            mx, my = sx + r * math.cos(a), sy + r * math.sin(a)
            rr_comp = rng.choice((-1.0, 1.0)) * rng.uniform(*noise.clutter_speed)
            rr = rr_comp - (sm.vx_s * math.cos(a) + sm.vy_s * math.sin(a))
            points.append(RadarPoint(mx, my, rr, normalize_angle(b), t, sid))
            labels.append(CLUTTER)
            outl.append(False)
            pvel.append((math.nan, math.nan))

    frame = Frame(tuple(points), reported, t, frame_index)
    return SimFrame(frame, np.array(labels, dtype=np.int64), np.array(outl, dtype=bool),
                    np.array(pvel, dtype=float).reshape(-1, 2), truth)


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Per-frame generator: frames are reproducible independently of each other."""
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(frame_index)])


def simulate(scenario: Scenario, seed: int = 0):
    """Yield :class:`SimFrame` for every frame time of the scenario."""
    for k, t in enumerate(scenario.frame_times()):
        yield generate_frame(scenario, float(t), k, rng=frame_rng(seed, k))


# --- built-in scenarios -------------------------------------------------------

ZOE_LENGTH = 4.1
ZOE_WIDTH = 1.8
FRONT_MOUNT = {"front": SensorMount(2.0, 0.0, 0.0)}


def loop_track(length: float = 750.0, radius: float = 40.0) -> Path:
    """Stadium-shaped closed loop of total ``length``."""
    straight = (length - 2 * math.pi * radius) / 2
    if straight <= 0:
        raise ValueError("radius too large for loop length")
    segs = [("line", straight), ("arc", radius, math.pi), ("line", straight), ("arc", radius, math.pi)]
    return Path((0.0, 0.0, 0.0), segs, closed=True)


def _path_flow(path: Path) -> dict:
    xs, ys, hs = path.sample(1.0)
    return {"type": "path", "x": xs.tolist(), "y": ys.tolist(), "heading": hs.tolist()}


def scenario_a(noise: NoiseModel | None = None, sensor: SensorModel | None = None,
               gap: float = 20.0) -> Scenario:
    """Ego follows the trackee around a ~750 m loop; trackee speeds up 0 -> 14 m/s."""
    path = loop_track()
    profile = SpeedProfile([(0.0, 0.0), (10.0, 14.0)])
    duration = 58.0
    ego = Trajectory(path, profile, 0.0)
    trackee = Target(1, ZOE_LENGTH, ZOE_WIDTH, Trajectory(path, profile, gap))
    return Scenario("A", ego, [trackee], duration, dict(FRONT_MOUNT),
                    sensor or SensorModel(), noise or NoiseModel(), _path_flow(path))


def scenario_b(noise: NoiseModel | None = None, sensor: SensorModel | None = None) -> Scenario:
    """Stationary ego; trackee in the adjacent lane drives towards it, speeding up then slowing."""
    path = Path((90.0, 3.5, math.pi), [("line", 120.0)])
    profile = SpeedProfile([(0.0, 2.0), (5.0, 10.0), (7.0, 10.0), (11.0, 3.0), (13.0, 3.0)])
    trackee = Target(1, ZOE_LENGTH, ZOE_WIDTH, Trajectory(path, profile))
    return Scenario("B", Trajectory.static(0.0, 0.0, 0.0), [trackee], 13.0, dict(FRONT_MOUNT),
                    sensor or SensorModel(), noise or NoiseModel(), {"type": "constant", "direction": 0.0})


def scenario_c(noise: NoiseModel | None = None, sensor: SensorModel | None = None,
               distance: float = 20.0, speed: float = 14.0) -> Scenario:
    """Stationary ego; trackee crosses perpendicular to the boresight at ``distance``."""
    half = 30.0
    path = Path((distance, -half, math.pi / 2), [("line", 2 * half)])
    trackee = Target(1, ZOE_LENGTH, ZOE_WIDTH, Trajectory(path, SpeedProfile([(0.0, speed)])))
    return Scenario("C", Trajectory.static(0.0, 0.0, 0.0), [trackee], 2 * half / speed,
                    dict(FRONT_MOUNT), sensor or SensorModel(), noise or NoiseModel(),
                    {"type": "constant", "direction": math.pi / 2})


def scenario_circle(noise: NoiseModel | None = None, sensor: SensorModel | None = None,
                    radius: float = 30.0, speed: float = 10.0, gap: float = 15.0,
                    laps: float = 1.0) -> Scenario:
    """Ego follows the trackee around a circle (turn-radius behaviour)."""
    path = Path((0.0, -radius, 0.0), [("arc", radius, 2 * math.pi)], closed=True)
    profile = SpeedProfile([(0.0, speed)])
    duration = laps * path.length / speed
    return Scenario("circle", Trajectory(path, profile, 0.0),
                    [Target(1, ZOE_LENGTH, ZOE_WIDTH, Trajectory(path, profile, gap))],
                    duration, dict(FRONT_MOUNT), sensor or SensorModel(), noise or NoiseModel(),
                    {"type": "none"})


def scenario_traffic(n_objects: int, seed: int = 0, duration: float = 10.0,
                     noise: NoiseModel | None = None, sensor: SensorModel | None = None) -> Scenario:
    """Stationary ego facing a multi-lane road with ``n_objects`` vehicles.

    Used for runtime measurements; vehicles travel in both directions with
    speeds of 4-16 m/s and are spread so that they stay in view.
    """
    rng = np.random.default_rng(seed)
    lanes = [-10.5, -7.0, -3.5, 3.5, 7.0, 10.5]
    lane_speed = {ln: float(rng.uniform(4.0, 16.0)) for ln in lanes}
    used = {ln: 0 for ln in lanes}
    targets = []
    for i in range(n_objects):
        lane = lanes[i % len(lanes)]
        # one speed per lane keeps the spacing between its vehicles constant
        speed = lane_speed[lane]
        start = 15.0 + 13.0 * used[lane] + float(rng.uniform(0, 3))
        used[lane] += 1
        if lane > 0:
            path = Path((start + speed * duration, lane, math.pi), [("line", 400.0)])
        else:
            path = Path((start, lane, 0.0), [("line", 400.0)])
        targets.append(Target(i + 1, ZOE_LENGTH, ZOE_WIDTH, Trajectory(path, SpeedProfile([(0.0, speed)]))))
    sensor = sensor or SensorModel(max_range=250.0)
    return Scenario(f"traffic{n_objects}", Trajectory.static(0.0, 0.0, 0.0), targets, duration,
                    dict(FRONT_MOUNT), sensor, noise or NoiseModel(),
                    {"type": "constant", "direction": 0.0})


BUILTIN = {
    "A": scenario_a,
    "B": scenario_b,
    "C": scenario_c,
    "circle": scenario_circle,
}
