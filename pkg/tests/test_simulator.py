import math

import numpy as np
import pytest

from radar_eot.core_types import SensorMount
from radar_eot.ego_comp import compensate
from radar_eot.simulator import (
    CLUTTER,
    BUILTIN,
    NoiseModel,
    Path,
    Scenario,
    SensorModel,
    SpeedProfile,
    Target,
    Trajectory,
    frame_rng,
    generate_frame,
    loop_track,
    scenario_a,
    scenario_b,
    scenario_c,
    scenario_traffic,
    simulate,
)


def test_builtin_geometry():
    assert scenario_a().ego.path.length == pytest.approx(750.0, abs=1.0)
    assert loop_track().length == pytest.approx(750.0, abs=1e-9)
    sc = scenario_b()
    for t in sc.frame_times():
        e = sc.ego_state(float(t))
        assert (e.vx_e, e.vy_e, e.omega_e) == (0.0, 0.0, 0.0)
    c = scenario_c()
    t_mid = c.duration / 2
    g = c.truth(t_mid)[0]
    assert g.y == pytest.approx(0.0, abs=1e-9)  # closest approach, straight ahead
    boresight = c.ego_state(t_mid).alpha + c.mounts["front"].theta_s
    assert math.cos(g.heading - boresight) == pytest.approx(0.0, abs=1e-12)
    assert set(BUILTIN) == {"A", "B", "C", "circle"}


def test_speed_profile_interpolates_and_integrates():
    p = SpeedProfile([(0.0, 0.0), (10.0, 14.0)])
    assert p.speed(5.0) == pytest.approx(7.0)
    assert p.distance(10.0) == pytest.approx(70.0)
    assert p.speed(20.0) == pytest.approx(14.0)


def crossing(noise=None, sensor=None):
    path = Path((20.0, -3.0, math.pi / 2), [("line", 50.0)])
    tgt = Target(1, 4.0, 2.0, Trajectory(path, SpeedProfile([(0.0, 10.0)])))
    return Scenario("x", Trajectory.static(0, 0, 0), [tgt], 1.0, {"front": SensorMount()},
                    sensor or SensorModel().noiseless(), noise or NoiseModel(outlier_prob=0.0))


def test_noiseless_round_trip_every_point():
    sc = scenario_a(NoiseModel(outlier_prob=0.0), SensorModel().noiseless())
    mount = sc.mounts["front"]
    checked = 0
    for k in (200, 380, 600):
        sf = generate_frame(sc, k / 14, k)
        for p, v in zip(sf.frame.points, sf.point_velocity):
            c = compensate(p, sf.frame.ego, mount)
            expect = v[0] * math.cos(c.phi_w) + v[1] * math.sin(c.phi_w)
            assert c.range_rate_comp == pytest.approx(expect, abs=1e-9)
            checked += 1
    assert checked > 10


def test_moving_ego_sees_static_world_at_minus_speed():
    path = Path((0.0, 0.0, 0.0), [("line", 200.0)])
    wall = Target(1, 1.0, 6.0, Trajectory.static(40.0, 0.0))
    sc = Scenario("w", Trajectory(path, SpeedProfile([(0.0, 5.0)])), [wall], 1.0,
                  {"front": SensorMount()}, SensorModel().noiseless(), NoiseModel(outlier_prob=0.0))
    sf = generate_frame(sc, 0.0)
    rr = np.array([p.range_rate_meas for p in sf.frame.points])
    b = np.array([p.bearing_sensor for p in sf.frame.points])
    assert rr == pytest.approx(-5.0 * np.cos(b), abs=1e-12)
    assert rr[np.argmin(np.abs(b))] == pytest.approx(-5.0, abs=2e-3)


def test_outlier_labels_are_exact():
    noisy = crossing(NoiseModel(outlier_prob=0.5))
    for k in range(10):
        sf = generate_frame(noisy, k / 14, k, rng=frame_rng(3, k))
        for p, v, bad in zip(sf.frame.points, sf.point_velocity, sf.outlier):
            c = compensate(p, sf.frame.ego, noisy.mounts["front"])
            err = abs(c.range_rate_comp - (v[0] * math.cos(c.phi_w) + v[1] * math.sin(c.phi_w)))
            assert (err >= 1.0 - 1e-9) if bad else (err < 1e-9)
    assert NoiseModel().outlier_prob == 0.3


def test_points_spaced_and_on_visible_side():
    sf = generate_frame(crossing(), 0.3, 4)
    xy = np.array([[p.x_w, p.y_w] for p in sf.frame.points])
    d = np.hypot(*(xy[:, None] - xy[None]).transpose(2, 0, 1)) + np.eye(len(xy)) * 1e9
    assert d.min() >= 0.6 - 1e-9
    assert np.all(xy[:, 0] <= 20.0 + 1.0 + 1e-9)  # far side of the 2 m wide body is hidden
    assert set(sf.labels.tolist()) == {1}


def test_clutter_labelled_and_dropout_thins():
    sc = crossing(NoiseModel(outlier_prob=0.0, clutter_rate=5.0))
    sf = generate_frame(sc, 0.0, 0, rng=np.random.default_rng(2))
    assert (sf.labels == CLUTTER).sum() > 0
    full = sum(len(generate_frame(crossing(), 0.0, k).frame.points) for k in range(20))
    thin = sum(len(generate_frame(crossing(NoiseModel(outlier_prob=0.0, dropout_prob=0.5)), 0.0, k,
                                  rng=np.random.default_rng(k)).frame.points) for k in range(20))
    assert thin < full


def test_determinism_and_independent_frames():
    sc = scenario_c()
    a = [sf.frame for sf in simulate(sc, 11)]
    b = [sf.frame for sf in simulate(sc, 11)]
    assert a == b
    assert [sf.frame for sf in simulate(sc, 12)] != a
    k = 17
    alone = generate_frame(sc, k / 14, k, rng=frame_rng(11, k))
    assert alone.frame == a[k]


def test_traffic_has_requested_objects_in_view():
    sc = scenario_traffic(12, seed=1)
    assert len(sc.targets) == 12
    sf = generate_frame(sc, 5.0, 70, rng=np.random.default_rng(0))
    assert len(set(sf.labels.tolist()) - {CLUTTER}) >= 10


def test_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(outlier_prob=1.5)
    with pytest.raises(ValueError):
        SensorModel(min_range=200.0)
    with pytest.raises(ValueError):
        loop_track(length=100.0)
