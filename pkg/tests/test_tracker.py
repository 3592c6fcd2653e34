import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radar_eot.clustering import Cluster, extreme_points_bbox
from radar_eot.core_types import PointCloud
from radar_eot.tracker import (
    KfConfig,
    Measurement,
    Track,
    Tracker,
    TrackStatus,
    merge_clusters,
    new_track,
    predict,
    update,
)
from radar_eot.velocity import RlsConfig


def cluster_at(xy, v, inliers=None, rr=None):
    xy = np.asarray(xy, float)
    n = len(xy)
    phi = np.arctan2(xy[:, 1], xy[:, 0])
    if rr is None:
        rr = v[0] * np.cos(phi) + v[1] * np.sin(phi)
    cloud = PointCloud(xy[:, 0], xy[:, 1], np.asarray(rr, float), phi, np.zeros(n), np.zeros(n, np.int64))
    box = extreme_points_bbox(xy, np.arctan2(v[1], v[0]))
    return Cluster(cloud, box, velocity=tuple(v), inlier_count=n if inliers is None else inliers)


def track(state, cov=None):
    return Track(0, np.array(state, float), np.eye(6) if cov is None else cov)


def test_predict_examples():
    out = predict(track([0, 0, 10, 0, 4, 2]), 0.1)
    assert out.state == pytest.approx([1, 0, 10, 0, 4, 2])
    for dt in (0.0, -0.1):
        with pytest.raises(ValueError):
            predict(track([0] * 6), dt)
    t0 = track([0] * 6)
    assert np.trace(predict(t0, 0.05).cov) > np.trace(t0.cov)


def test_predict_covariance_by_hand():
    cfg = KfConfig(q_accel=2.0, q_extent=0.5)
    out = predict(track([0] * 6), 0.5, cfg)
    # F P F' with P = I adds dt^2 to the position variances, Q adds q dt^3/3
    assert out.cov[0, 0] == pytest.approx(1 + 0.25 + 2 * 0.125 / 3)
    assert out.cov[0, 2] == pytest.approx(0.5 + 2 * 0.25 / 2)
    assert out.cov[2, 2] == pytest.approx(1 + 2 * 0.5)
    assert out.cov[4, 4] == pytest.approx(1 + 0.25)
    assert out.cov[0, 1] == 0


def test_update_limits_and_scalar_midpoint():
    prior = track([0, 0, 0, 0, 4, 2])
    z = [2, -1, 3, 0.5, 5, 1.5]
    tight = update(prior, z, KfConfig(r=(1e-12,) * 6))
    assert tight.state == pytest.approx(z, abs=1e-9)
    loose = update(prior, z, KfConfig(r=(1e12,) * 6))
    assert loose.state == pytest.approx(prior.state, abs=1e-9)
    mid = update(prior, z, KfConfig(r=(1.0,) * 6))
    assert mid.state[0] == pytest.approx(1.0) and mid.cov[0, 0] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        update(prior, [np.nan, 0, 0, 0, 0, 0])


def test_update_clamps_extents():
    out = update(track([0, 0, 0, 0, 0.1, 0.1]), [0, 0, 0, 0, -5, -5], KfConfig(r=(1e-6,) * 6))
    assert min(out.extents) >= 0


def test_covariance_stays_psd_over_long_runs():
    rng = np.random.default_rng(0)
    cfg = KfConfig()
    tr = new_track(0, (0, 0), (1, 1), 0.0, cfg)
    for _ in range(1000):
        tr = predict(tr, float(rng.uniform(1e-3, 0.5)), cfg)
        if rng.random() < 0.7:
            tr = update(tr, tr.state + rng.normal(0, 3, 6), cfg)
        assert np.allclose(tr.cov, tr.cov.T, atol=0)
        assert np.linalg.eigvalsh(tr.cov)[0] >= -1e-9


@given(st.lists(st.tuples(st.floats(1e-3, 2.0), st.booleans()), max_size=40),
       st.floats(1e-4, 10), st.floats(0, 50))
def test_covariance_psd_for_any_noise(seq, r, q):
    cfg = KfConfig(r=(r,) * 6, q_accel=q)
    tr = new_track(0, (0, 0), (0, 0), 0.0, cfg)
    for dt, upd in seq:
        tr = predict(tr, dt, cfg)
        if upd:
            tr = update(tr, np.ones(6), cfg)
        assert np.linalg.eigvalsh(tr.cov)[0] >= -1e-9


def test_new_track_initial_values():
    tr = new_track(3, (5, 6), (7, 8), 1.5)
    assert tr.state.tolist() == [5, 6, 7, 8, 4, 2]
    assert tr.status is TrackStatus.INVALID and tr.hits == 0 and tr.misses == 0


def test_zero_noise_converges_on_cv_target():
    cfg = KfConfig(r=(1e-12,) * 6, q_accel=0.0, q_extent=0.0)
    truth = lambda t: np.array([3 + 8 * t, -2 + 1 * t, 8, 1, 4.5, 1.9])  # noqa: E731
    # the track is born from the first exact measurement, extents from defaults
    tr = new_track(0, truth(0)[:2], truth(0)[2:4], 0.0, cfg)
    for k in range(1, 6):
        tr = update(predict(tr, 1 / 14, cfg), truth(k / 14), cfg)
    assert np.abs(tr.state - truth(5 / 14)).max() < 1e-6


# --- merge --------------------------------------------------------------------

def test_merge_single_cluster_is_identity():
    c = cluster_at([[20, 0], [22, 0.5], [21, 1]], (5, 0))
    m = merge_clusters([c])
    assert (m.x, m.y, m.vx, m.vy, m.l, m.w) == (c.box.cx, c.box.cy, 5, 0, c.box.length, c.box.width)
    assert not m.fallback


def test_merge_fallback_uses_inlier_weighted_mean():
    a = cluster_at([[20, 0], [21, 0.5], [22, 0]], (10, 0), inliers=6, rr=[30.0, 30.0, 30.0])
    b = cluster_at([[24, 0], [25, 0.5]], (10.4, 0), inliers=2, rr=[-30.0, -30.0])
    m = merge_clusters([a, b], RlsConfig(warmup_updates=0, outlier_delta_threshold=1e-9))
    assert m.fallback
    assert (m.vx, m.vy) == pytest.approx((10.1, 0.0))


def test_merge_two_halves_spans_vehicle():
    xs = np.arange(0.0, 8.01, 0.6)
    edge = np.column_stack([30 + xs, np.full(xs.size, 5.0)])
    front, back = edge[xs < 3.5], edge[xs > 4.5]
    m = merge_clusters([cluster_at(front, (10, 0)), cluster_at(back, (10, 0))],
                       rng=np.random.default_rng(0))
    assert m.vx == pytest.approx(10, abs=1e-6) and m.vy == pytest.approx(0, abs=1e-6)
    assert m.l == pytest.approx(xs[-1], abs=1e-9)
    assert m.x == pytest.approx(30 + xs[-1] / 2)


def test_merge_needs_a_cluster():
    with pytest.raises(ValueError):
        merge_clusters([])


# --- lifecycle ----------------------------------------------------------------

def reference_automaton(seq, confirm=3, delete=5):
    """Status of the track after each symbol; 'deleted' is absorbing."""
    hits = misses = 0
    status, out = "invalid", []
    for s in seq:
        if s == "H":
            hits, misses = hits + 1, 0
            if hits >= confirm:
                status = "valid"
        else:
            hits, misses = 0, misses + 1
            if misses >= delete:
                out.append("deleted")
                break
        out.append(status)
    return out


def drive(seq):
    cfg = KfConfig()
    tk = Tracker(cfg)
    c = cluster_at([[20, 0], [20.6, 0.3], [21.2, 0.6]], (0.0, 0.0))
    tk.step([c], 0.0)
    tid = tk.tracks[0].id
    out = []
    for k, s in enumerate(seq, 1):
        tk.step([c] if s == "H" else [], k / 14)
        mine = [t for t in tk.tracks if t.id == tid]
        if not mine:
            assert tid in tk.deleted
            out.append("deleted")
            break
        out.append(mine[0].status.value)
    return out


def test_lifecycle_matches_reference_for_all_short_sequences():
    checked = 0
    for n in range(9):
        for seq in itertools.product("HM", repeat=n):
            assert drive(seq) == reference_automaton(seq), seq
            checked += 1
    assert checked == 511


def test_lifecycle_examples():
    assert drive("HHH")[-1] == "valid" and drive("HH")[-1] == "invalid"
    assert drive("HHHMMMMM") == ["invalid", "invalid", "valid", "valid", "valid", "valid", "valid", "deleted"]
    assert drive("HHMH")[-1] == "invalid"  # hits must be consecutive


def test_unassigned_cluster_spawns_track_and_only_valid_emitted():
    tk = Tracker()
    tk.step([cluster_at([[10, 0], [10.5, 0.5]], (3, 0)), cluster_at([[50, 20], [51, 20]], (-2, 1))], 0.0)
    assert [t.id for t in tk.tracks] == [0, 1]
    assert all(t.extents == (4.0, 2.0) for t in tk.tracks)
    assert tk.valid_tracks() == []


def test_clusters_without_velocity_are_ignored():
    c = cluster_at([[10, 0], [10.5, 0.5]], (3, 0))
    c.velocity = None
    tk = Tracker()
    tk.step([c], 0.0)
    assert tk.tracks == []


def test_measurement_vector():
    m = Measurement(1, 2, 3, 4, 5, 6)
    assert m.vector().tolist() == [1, 2, 3, 4, 5, 6]
