"""Pipeline configuration: YAML files plus ``RADAR_EOT_<SECTION>__<FIELD>`` overrides."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .clustering import DbscanParams
from .tracker import KfConfig
from .velocity import RlsConfig

ENV_PREFIX = "RADAR_EOT_"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PreprocessConfig:
    static_threshold: float = 0.5
    depth: int = 3
    ego_max_skew: float = 0.010


@dataclass(frozen=True)
class VelocityStageConfig:
    """How clusters feed the velocity estimators.

    ``window`` is how many of the newest accumulated frames contribute points
    (0 means all of them). ``cah_gate`` bounds the centre distance for matching
    a cluster to one from the previous step. A cluster whose bearings carry less
    than ``min_flow_information`` about motion along the local flow direction
    is marked degenerate and kept away from the tracker.
    """

    window: int = 0
    cah_gate: float = 3.0
    min_flow_information: float = 0.2
    ransac_iters: int = 50
    ransac_tol: float = 0.3
    baselines: bool = True


@dataclass(frozen=True)
class PipelineConfig:
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    dbscan: DbscanParams = field(default_factory=DbscanParams)
    rls: RlsConfig = field(default_factory=RlsConfig)
    velocity: VelocityStageConfig = field(default_factory=VelocityStageConfig)
    kf: KfConfig = field(default_factory=KfConfig)
    degeneracy_limit: float = 0.5

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_SECTIONS = {
    "preprocess": PreprocessConfig,
    "dbscan": DbscanParams,
    "rls": RlsConfig,
    "velocity": VelocityStageConfig,
    "kf": KfConfig,
}


def _coerce(cls, name: str, value: Any):
    ftype = {f.name: f for f in dataclasses.fields(cls)}[name].type
    if "tuple" in str(ftype):
        return tuple(float(v) for v in value)
    if "int" in str(ftype) and "float" not in str(ftype):
        return int(value)
    if "bool" in str(ftype):
        return bool(value)
    if "float" in str(ftype):
        return float(value)
    return value


def config_from_dict(doc: Mapping | None) -> PipelineConfig:
    doc = dict(doc or {})
    kwargs = {}
    for key, value in doc.items():
        if key in _SECTIONS:
            cls = _SECTIONS[key]
            names = {f.name for f in dataclasses.fields(cls)}
            unknown = set(value or {}) - names
            if unknown:
                raise ConfigError(f"unknown {key} field(s): {', '.join(sorted(unknown))}")
            try:
                kwargs[key] = cls(**{k: _coerce(cls, k, v) for k, v in (value or {}).items()})
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"section {key}: {exc}") from exc
        elif key == "degeneracy_limit":
            try:
                kwargs[key] = float(value)
            except (TypeError, ValueError):
                raise ConfigError(f"degeneracy_limit must be a number, got {value!r}") from None
        else:
            raise ConfigError(f"unknown config section {key!r}")
    return PipelineConfig(**kwargs)


def env_overrides(environ: Mapping[str, str] | None = None) -> dict:
    """Collect ``RADAR_EOT_SECTION__FIELD=value`` pairs into a nested dict.

    ``RADAR_EOT_DEGENERACY_LIMIT`` sets the one top-level field; other
    variables with the prefix but no ``__`` are left alone.
    """
    environ = os.environ if environ is None else environ
    out: dict = {}
    for key, raw in environ.items():
        if key == ENV_PREFIX + "DEGENERACY_LIMIT":
            out["degeneracy_limit"] = yaml.safe_load(raw)
            continue
        if not key.startswith(ENV_PREFIX) or "__" not in key:
            continue
        section, name = key[len(ENV_PREFIX):].lower().split("__", 1)
        out.setdefault(section, {})[name] = yaml.safe_load(raw)
    return out


def merge(base: Mapping, over: Mapping) -> dict:
    out = {k: (dict(v) if isinstance(v, Mapping) else v) for k, v in base.items()}
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), Mapping):
            out[k] = {**out[k], **v}
        else:
            out[k] = v
    return out


def load_yaml(path: str | Path) -> Any:
    """Parse YAML, turning syntax errors into a one-line diagnostic with the line number."""
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"{path}:{mark.line + 1}:{mark.column + 1}" if mark else str(path)
        raise ConfigError(f"{where}: {exc.problem}") from exc


def load_config(path: str | Path | None = None, environ: Mapping[str, str] | None = None) -> PipelineConfig:
    doc = load_yaml(path) if path else {}
    if doc is not None and not isinstance(doc, Mapping):
        raise ConfigError(f"{path}: top level must be a mapping")
    return config_from_dict(merge(doc or {}, env_overrides(environ)))
