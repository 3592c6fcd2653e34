"""Per-frame runtime of the pipeline as the number of tracked objects grows."""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .config import PipelineConfig
from .pipeline import Pipeline
from .simulator import Scenario, scenario_traffic, simulate

DEFAULT_COUNTS = (5, 10, 20, 30)
WARMUP_FRAMES = 3  # the accumulation window is still filling up


def time_scenario(scenario: Scenario, cfg: PipelineConfig = PipelineConfig(), seed: int = 0) -> dict:
    """Wall time per frame of the velocity stage and the whole pipeline, in ms.

    Baseline estimators are switched off: they are excluded from the timings
    anyway and only slow the run down.
    """
    cfg = replace(cfg, velocity=replace(cfg.velocity, baselines=False))
    frames = list(simulate(scenario, seed))
    pipe = Pipeline(cfg, scenario.mounts, scenario.flow, seed)
    vel, full, clusters = [], [], []
    for sf in frames:
        res = pipe.process(sf.frame, sf.labels)
        if sf.frame.frame_index >= WARMUP_FRAMES:
            vel.append(res.velocity_ms)
            full.append(res.pipeline_ms)
            clusters.append(len(res.clusters))
    vel, full = np.array(vel), np.array(full)
    return {
        "scenario": scenario.label, "frames": int(full.size),
        "clusters_mean": float(np.mean(clusters)) if clusters else 0.0,
        "velocity_mean_ms": float(vel.mean()), "velocity_std_ms": float(vel.std()),
        "pipeline_mean_ms": float(full.mean()), "pipeline_std_ms": float(full.std()),
        "pipeline_p99_ms": float(np.quantile(full, 0.99)), "pipeline_max_ms": float(full.max()),
    }


def sweep(counts=DEFAULT_COUNTS, cfg: PipelineConfig = PipelineConfig(), seed: int = 0,
          duration: float = 10.0) -> list[dict]:
    rows = []
    for n in counts:
        row = time_scenario(scenario_traffic(int(n), seed=seed, duration=duration), cfg, seed)
        rows.append({"objects": int(n), **row})
    return rows
