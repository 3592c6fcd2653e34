"""Scenario description files (YAML).

A file either extends a built-in scenario or describes one from scratch::

    builtin: A              # optional; A, B, C or circle
    params: {gap: 15.0}     # keyword arguments for the built-in factory
    noise: {outlier_prob: 0.0}   # default is 0.3
    sensor: {doppler_sigma: 0.12}

    # or, without ``builtin``:
    label: crossing
    duration: 6.0
    mounts: {front: {x: 2.0, y: 0.0, theta: 0.0}}
    ego: {static: [0.0, 0.0, 0.0]}
    targets:
      - id: 1
        length: 4.1
        width: 1.8
        path: {start: [20.0, -30.0, 1.5708], segments: [[line, 60.0]]}
        speed: [[0.0, 14.0]]
    flow: {type: constant, direction: 1.5708}   # or flow_file: lanes.yaml

``sensor``, ``noise``, ``mounts`` and ``flow`` override the built-in values
when both are given. Relative ``flow_file`` paths resolve against the
scenario file's directory.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path as FsPath
from typing import Any, Mapping

from .config import ConfigError, load_yaml
from .core_types import SensorMount
from .simulator import (
    BUILTIN,
    NoiseModel,
    Path,
    Scenario,
    SensorModel,
    SpeedProfile,
    Target,
    Trajectory,
)

_TOP_KEYS = {"builtin", "params", "label", "duration", "mounts", "ego", "targets", "flow",
             "flow_file", "sensor", "noise"}


class ScenarioError(ConfigError):
    pass


def _section(cls, doc: Any, name: str):
    if doc is None:
        return cls()
    if not isinstance(doc, Mapping):
        raise ScenarioError(f"{name} must be a mapping")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - known
    if unknown:
        raise ScenarioError(f"unknown {name} field(s): {', '.join(sorted(unknown))}")
    vals = {k: tuple(v) if isinstance(v, list) else v for k, v in doc.items()}
    try:
        return cls(**vals)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{name}: {exc}") from exc


def _trajectory(doc: Mapping, what: str) -> Trajectory:
    if "static" in doc:
        x, y, *h = doc["static"]
        return Trajectory.static(float(x), float(y), float(h[0]) if h else 0.0)
    try:
        p = doc["path"]
        path = Path(p["start"], [tuple(s) for s in p["segments"]], bool(p.get("closed", False)))
        profile = SpeedProfile([tuple(k) for k in doc["speed"]])
    except KeyError as exc:
        raise ScenarioError(f"{what}: missing field {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"{what}: {exc}") from exc
    return Trajectory(path, profile, float(doc.get("s0", 0.0)))


def _mounts(doc: Mapping) -> dict[str, SensorMount]:
    try:
        return {str(k): SensorMount(float(v.get("x", 0.0)), float(v.get("y", 0.0)),
                                    float(v.get("theta", 0.0)))
                for k, v in doc.items()}
    except (AttributeError, ValueError) as exc:
        raise ScenarioError(f"mounts: {exc}") from exc


def scenario_from_dict(doc: Mapping, base_dir: str | FsPath = ".") -> Scenario:
    if not isinstance(doc, Mapping):
        raise ScenarioError("scenario file must contain a mapping")
    unknown = set(doc) - _TOP_KEYS
    if unknown:
        raise ScenarioError(f"unknown scenario key(s): {', '.join(sorted(unknown))}")
    sensor = _section(SensorModel, doc.get("sensor"), "sensor")
    noise = _section(NoiseModel, doc.get("noise"), "noise")

    if "builtin" in doc:
        name = str(doc["builtin"])
        if name not in BUILTIN:
            raise ScenarioError(f"unknown builtin scenario {name!r} (choose from {', '.join(BUILTIN)})")
        try:
            sc = BUILTIN[name](noise=noise, sensor=sensor, **(doc.get("params") or {}))
        except TypeError as exc:
            raise ScenarioError(f"params: {exc}") from exc
        if "label" in doc:
            sc.label = str(doc["label"])
        if "duration" in doc:
            sc.duration = float(doc["duration"])
    else:
        for key in ("duration", "ego", "targets"):
            if key not in doc:
                raise ScenarioError(f"missing required key {key!r}")
        targets = []
        for i, t in enumerate(doc["targets"]):
            try:
                targets.append(Target(int(t["id"]), float(t["length"]), float(t["width"]),
                                      _trajectory(t, f"targets[{i}]")))
            except KeyError as exc:
                raise ScenarioError(f"targets[{i}]: missing field {exc.args[0]!r}") from exc
        sc = Scenario(str(doc.get("label", "custom")), _trajectory(doc["ego"], "ego"), targets,
                      float(doc["duration"]), sensor=sensor, noise=noise)

    if "mounts" in doc:
        sc.mounts = _mounts(doc["mounts"])
    if "flow_file" in doc:
        sc.flow = load_yaml(FsPath(base_dir) / str(doc["flow_file"]))
    elif "flow" in doc:
        sc.flow = doc["flow"]
    if sc.duration <= 0:
        raise ScenarioError("duration must be positive")
    return sc


def load_scenario(name_or_path: str) -> Scenario:
    """A built-in name (``A``, ``B``, ``C``, ``circle``) or a path to a YAML file."""
    if name_or_path in BUILTIN:
        return BUILTIN[name_or_path]()
    path = FsPath(name_or_path)
    if not path.exists():
        raise ScenarioError(f"{name_or_path}: no such scenario file or built-in name")
    doc = load_yaml(path)
    return scenario_from_dict(doc, path.parent)
