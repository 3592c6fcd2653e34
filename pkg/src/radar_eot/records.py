"""JSON-lines frame records.

The first line may be a ``meta`` record carrying ``schema_version`` (and
free-form fields such as the scenario label and seed). Every other line is a
JSON object with ``type``, ``frame`` and ``t``:

* ``ego``: ``x, y, alpha, vx, vy, omega`` (exactly one per frame)
* ``point``: ``x, y, range_rate, bearing, sensor`` and optional ``label``
* ``truth``: ``id, x, y, heading, vx, vy, yaw_rate, length, width``

Records of a frame are contiguous and frames appear in increasing order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

import numpy as np

from .core_types import EgoState, Frame, RadarPoint
from .simulator import SimFrame, TargetTruth

SCHEMA_VERSION = 1

_FIELDS = {
    "ego": ("x", "y", "alpha", "vx", "vy", "omega"),
    "point": ("x", "y", "range_rate", "bearing"),
    "truth": ("id", "x", "y", "heading", "vx", "vy", "yaw_rate", "length", "width"),
}


class RecordError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def frame_records(sf: SimFrame) -> Iterator[dict]:
    f = sf.frame
    k, t = f.frame_index, f.timestamp
    e = f.ego
    yield {"type": "ego", "frame": k, "t": t, "x": e.x_e, "y": e.y_e, "alpha": e.alpha,
           "vx": e.vx_e, "vy": e.vy_e, "omega": e.omega_e}
    for p, lab in zip(f.points, sf.labels.tolist()):
        yield {"type": "point", "frame": k, "t": t, "x": p.x_w, "y": p.y_w,
               "range_rate": p.range_rate_meas, "bearing": p.bearing_sensor,
               "sensor": p.sensor_id, "label": lab}
    for g in sf.truth:
        yield {"type": "truth", "frame": k, "t": t, "id": g.id, "x": g.x, "y": g.y,
               "heading": g.heading, "vx": g.vx, "vy": g.vy, "yaw_rate": g.yaw_rate,
               "length": g.length, "width": g.width}


def write_frames(frames: Iterable[SimFrame], fh: IO[str], **meta) -> int:
    head = {"type": "meta", "schema_version": SCHEMA_VERSION, **meta}
    fh.write(json.dumps(head, sort_keys=True))
    fh.write("\n")
    n = 0
    for sf in frames:
        for rec in frame_records(sf):
            fh.write(json.dumps(rec, sort_keys=True, default=float))
            fh.write("\n")
        n += 1
    return n


@dataclass
class _Pending:
    index: int
    t: float
    line: int
    ego: EgoState | None = None

    def __post_init__(self):
        self.points: list[RadarPoint] = []
        self.labels: list[int] = []
        self.truth: list[TargetTruth] = []

    def build(self) -> SimFrame:
        if self.ego is None:
            raise RecordError(self.line, f"frame {self.index} has no ego record")
        n = len(self.points)
        frame = Frame(tuple(self.points), self.ego, self.t, self.index)
        return SimFrame(frame, np.array(self.labels, dtype=np.int64), np.zeros(n, dtype=bool),
                        np.full((n, 2), math.nan), self.truth)


def _num(rec: dict, key: str, line: int) -> float:
    try:
        v = float(rec[key])
    except KeyError:
        raise RecordError(line, f"{rec.get('type')} record missing {key!r}") from None
    except (TypeError, ValueError):
        raise RecordError(line, f"{key!r} is not a number") from None
    if not math.isfinite(v):
        raise RecordError(line, f"{key!r} is not finite")
    return v


def read_frames(fh: IO[str]) -> Iterator[SimFrame]:
    """Parse records back into frames; malformed input raises :class:`RecordError`."""
    cur: _Pending | None = None
    for line_no, raw in enumerate(fh, 1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise RecordError(line_no, f"invalid JSON ({exc.msg})") from None
        if not isinstance(rec, dict):
            raise RecordError(line_no, "record must be a JSON object")
        kind = rec.get("type")
        if kind == "meta":
            if cur is not None:
                raise RecordError(line_no, "meta record must come before any frame")
            if rec.get("schema_version") != SCHEMA_VERSION:
                raise RecordError(line_no, f"unsupported schema_version {rec.get('schema_version')!r}")
            continue
        if kind not in _FIELDS:
            raise RecordError(line_no, f"unknown record type {kind!r}")
        k = int(_num(rec, "frame", line_no))
        t = _num(rec, "t", line_no)
        if cur is None or k != cur.index:
            if cur is not None:
                if k < cur.index:
                    raise RecordError(line_no, f"frame {k} after frame {cur.index}")
                yield cur.build()
            cur = _Pending(k, t, line_no)
        elif t != cur.t:
            raise RecordError(line_no, f"time {t} differs from frame time {cur.t}")
        vals = [_num(rec, f, line_no) for f in _FIELDS[kind]]
        try:
            if kind == "ego":
                if cur.ego is not None:
                    raise RecordError(line_no, f"second ego record for frame {k}")
                cur.ego = EgoState(*vals, timestamp=t)
            elif kind == "point":
                cur.points.append(RadarPoint(*vals, timestamp=t, sensor_id=str(rec.get("sensor", "front"))))
                cur.labels.append(int(rec.get("label", -1)))
            else:
                cur.truth.append(TargetTruth(int(vals[0]), *vals[1:]))
        except ValueError as exc:
            if isinstance(exc, RecordError):
                raise
            raise RecordError(line_no, str(exc)) from None
    if cur is not None:
        yield cur.build()
