"""Gated one-to-many track/cluster association.

Every cluster independently picks the gated-in track with the smallest summed
position + velocity innovation, so several clusters may land on one track.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_GATE_POS = 9.0
DEFAULT_GATE_VEL = 9.0


@dataclass(frozen=True)
class Innovation:
    i_pos: float
    i_vel: float

    @property
    def total(self) -> float:
        return self.i_pos + self.i_vel


@dataclass
class AssociationResult:
    assignments: dict[int, int] = field(default_factory=dict)
    unassigned_clusters: list[int] = field(default_factory=list)

    @property
    def tracks_with_clusters(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for cid, tid in sorted(self.assignments.items()):
            out.setdefault(tid, []).append(cid)
        return out


def innovation(track_state, cluster_centre, cluster_velocity) -> Innovation:
    """Squared position and velocity differences.

    ``track_state`` is ``(x, y, vx, vy, ...)`` of the predicted track.
    """
    if cluster_velocity is None:
        raise ValueError("cluster has no velocity estimate")
    return Innovation(
        (track_state[0] - cluster_centre[0]) ** 2 + (track_state[1] - cluster_centre[1]) ** 2,
        (track_state[2] - cluster_velocity[0]) ** 2 + (track_state[3] - cluster_velocity[1]) ** 2,
    )


def associate(
    tracks: Sequence[tuple[int, Sequence[float]]],
    clusters: Sequence[tuple[int, tuple[float, float], tuple[float, float] | None]],
    gate_pos: float = DEFAULT_GATE_POS,
    gate_vel: float = DEFAULT_GATE_VEL,
) -> AssociationResult:
    """Assign clusters to predicted tracks.

    ``tracks`` holds ``(track_id, state)`` and ``clusters`` holds
    ``(cluster_id, centre, velocity)``. Gates are strict; ties go to the lower
    track id. Clusters without a velocity are never assigned.
    """
    result = AssociationResult()
    ids = np.array([tid for tid, _ in tracks], dtype=np.int64)
    st = np.array([list(state[:4]) for _, state in tracks], dtype=float).reshape(-1, 4)
    for cid, centre, vel in clusters:
        if vel is None or len(ids) == 0:
            result.unassigned_clusters.append(cid)
            continue
        i_pos = (st[:, 0] - centre[0]) ** 2 + (st[:, 1] - centre[1]) ** 2
        i_vel = (st[:, 2] - vel[0]) ** 2 + (st[:, 3] - vel[1]) ** 2
        ok = np.flatnonzero((i_pos < gate_pos) & (i_vel < gate_vel))
        if len(ok) == 0:
            result.unassigned_clusters.append(cid)
            continue
        tot = i_pos[ok] + i_vel[ok]
        best = ok[np.lexsort((ids[ok], tot))[0]]
        result.assignments[cid] = int(ids[best])
    return result
