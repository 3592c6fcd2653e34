import itertools
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from radar_eot.association import associate, innovation


def test_innovation_examples():
    assert innovation((1, 2, 3, 4), (1, 2), (3, 4)).total == 0
    inn = innovation((0, 0, 1, 0), (3, 4), (1, 2))
    assert (inn.i_pos, inn.i_vel, inn.total) == (25, 4, 29)
    inn = innovation((0, 0, 5, 5), (2.9, 0), (5, 5))
    assert inn.i_pos == pytest.approx(8.41)
    with pytest.raises(ValueError):
        innovation((0, 0, 0, 0), (0, 0), None)


def test_gate_boundaries_are_strict():
    tracks = [(0, (0.0, 0.0, 5.0, 5.0))]
    assert associate(tracks, [(0, (2.9, 0.0), (5.0, 5.0))]).assignments == {0: 0}
    r = associate(tracks, [(0, (3.0, 0.0), (5.0, 5.0))])
    assert r.assignments == {} and r.unassigned_clusters == [0]
    r = associate(tracks, [(0, (0.0, 0.0), (8.0, 5.0))])
    assert r.unassigned_clusters == [0]


def test_argmin_total_and_tie_break():
    tracks = [(7, (1.0, 1.0, 1.0, 0.0)), (3, (0.0, 2.0, 0.0, 0.0))]
    # totals: track 7 -> 2 + 1 = 3, track 3 -> 4 + 1 = 5
    assert associate(tracks, [(0, (0.0, 0.0), (0.0, 0.0))]).assignments == {0: 7}
    twins = [(9, (1.0, 0.0, 0.0, 0.0)), (4, (-1.0, 0.0, 0.0, 0.0))]
    assert associate(twins, [(0, (0.0, 0.0), (0.0, 0.0))]).assignments == {0: 4}


def test_one_to_many_long_vehicle_halves():
    track = [(1, (10.0, 0.0, 10.0, 0.0))]
    halves = [(0, (8.0, 0.0), (10.1, 0.0)), (1, (12.0, 0.2), (9.9, 0.1))]
    res = associate(track, halves)
    assert res.assignments == {0: 1, 1: 1}
    assert res.tracks_with_clusters == {1: [0, 1]}


def test_no_tracks_or_no_velocity_means_unassigned():
    assert associate([], [(0, (0, 0), (0, 0))]).unassigned_clusters == [0]
    assert associate([(0, (0, 0, 0, 0))], [(5, (0, 0), None)]).unassigned_clusters == [5]


coord = st.floats(-6, 6, allow_nan=False)
track_st = st.lists(st.tuples(coord, coord, coord, coord), max_size=5)
cluster_st = st.lists(st.tuples(coord, coord, coord, coord), max_size=8)


def brute(tracks, clusters, gp, gv):
    out = {}
    for cid, (cx, cy, vx, vy) in enumerate(clusters):
        best = None
        for tid, (x, y, tvx, tvy) in enumerate(tracks):
            ip = (x - cx) ** 2 + (y - cy) ** 2
            iv = (tvx - vx) ** 2 + (tvy - vy) ** 2
            if ip < gp and iv < gv and (best is None or (ip + iv, tid) < best):
                best = (ip + iv, tid)
        if best is not None:
            out[cid] = best[1]
    return out


def run(tracks, clusters, gp=9.0, gv=9.0, order=None):
    order = range(len(clusters)) if order is None else order
    return associate(list(enumerate(tracks)),
                     [(i, clusters[i][:2], clusters[i][2:]) for i in order], gp, gv)


@given(track_st, cluster_st, st.floats(0.1, 30), st.floats(0.1, 30))
def test_matches_brute_force(tracks, clusters, gp, gv):
    res = run(tracks, clusters, gp, gv)
    assert res.assignments == brute(tracks, clusters, gp, gv)
    assert sorted(list(res.assignments) + res.unassigned_clusters) == list(range(len(clusters)))


@given(track_st, cluster_st, st.randoms(use_true_random=False))
def test_cluster_order_does_not_matter(tracks, clusters, rnd):
    order = list(range(len(clusters)))
    rnd.shuffle(order)
    assert run(tracks, clusters).assignments == run(tracks, clusters, order=order).assignments


@given(track_st, cluster_st, st.floats(0.5, 1.0), st.floats(0.5, 1.0))
def test_tightening_gates_never_adds(tracks, clusters, sp, sv):
    wide = run(tracks, clusters)
    tight = run(tracks, clusters, 9 * sp, 9 * sv)
    assert set(tight.assignments) <= set(wide.assignments)


def test_exhaustive_small_grid():
    vals = [(0.0, 0.0, 0.0, 0.0), (2.0, 2.0, 1.0, 0.0), (3.0, 0.0, 0.0, 3.0)]
    for tracks in itertools.product(vals, repeat=2):
        for clusters in itertools.product(vals, repeat=2):
            assert run(tracks, clusters).assignments == brute(tracks, clusters, 9, 9)
    assert not math.isnan(innovation(vals[1], vals[2][:2], vals[2][2:]).total)
