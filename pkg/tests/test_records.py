import io
import json

import numpy as np
import pytest

from radar_eot.records import SCHEMA_VERSION, RecordError, read_frames, write_frames
from radar_eot.simulator import NoiseModel, scenario_c, simulate


def test_round_trip_is_lossless():
    sc = scenario_c(NoiseModel(clutter_rate=1.0))
    frames = list(simulate(sc, 5))[:20]
    buf = io.StringIO()
    assert write_frames(frames, buf, scenario="C", seed=5) == 20
    back = list(read_frames(io.StringIO(buf.getvalue())))
    assert [b.frame for b in back] == [f.frame for f in frames]
    for a, b in zip(frames, back):
        assert np.array_equal(a.labels, b.labels)
        assert a.truth == b.truth
    head = json.loads(buf.getvalue().splitlines()[0])
    assert head == {"type": "meta", "schema_version": SCHEMA_VERSION, "scenario": "C", "seed": 5}


EGO = '{"type": "ego", "frame": 0, "t": 0.0, "x": 0, "y": 0, "alpha": 0, "vx": 0, "vy": 0, "omega": 0}'
PT = '{"type": "point", "frame": 0, "t": 0.0, "x": 5, "y": 1, "range_rate": 2, "bearing": 0.2}'


def parse(text):
    return list(read_frames(io.StringIO(text)))


def test_minimal_stream_and_defaults():
    (sf,) = parse(EGO + "\n\n" + PT + "\n")
    assert len(sf.frame.points) == 1
    assert sf.frame.points[0].sensor_id == "front" and sf.labels.tolist() == [-1]


@pytest.mark.parametrize("text,line,fragment", [
    (EGO + "\n{oops", 2, "invalid JSON"),
    (EGO + "\n[1, 2]", 2, "JSON object"),
    (EGO + '\n{"type": "radar", "frame": 0, "t": 0}', 2, "unknown record type"),
    (EGO + "\n" + PT.replace('"range_rate": 2, ', ""), 2, "missing 'range_rate'"),
    (EGO + "\n" + PT.replace('"x": 5', '"x": "five"'), 2, "not a number"),
    (EGO + "\n" + PT.replace('"x": 5', '"x": NaN'), 2, "not finite"),
    (EGO + "\n" + EGO, 2, "second ego"),
    (PT + "\n" + EGO.replace('"frame": 0', '"frame": 1'), 1, "no ego record"),
    (EGO.replace('"frame": 0', '"frame": 2') + "\n" + EGO, 2, "after frame 2"),
    (EGO + "\n" + PT.replace('"t": 0.0', '"t": 0.5'), 2, "differs from frame time"),
    (EGO + '\n{"type": "meta", "schema_version": 1}', 2, "before any frame"),
    ('{"type": "meta", "schema_version": 99}', 1, "schema_version"),
    (EGO + "\n" + PT.replace('"bearing": 0.2', '"bearing": 9.0'), 2, "bearing"),
])
def test_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(RecordError) as err:
        parse(text)
    assert err.value.line == line
    assert fragment in str(err.value) and str(err.value).startswith(f"line {line}:")
