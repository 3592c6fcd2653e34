"""Command-line entry point: ``radar-eot {simulate,run,bench,stats}``.

Exit status is 0 on success, 1 for unusable input (bad flags, unreadable or
malformed files) and 2 when the share of degenerate clusters in a run exceeds
the configured ``degeneracy_limit``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import yaml

from . import KERNEL_BACKEND
from .bench import DEFAULT_COUNTS, sweep, time_scenario
from .config import ENV_PREFIX, ConfigError, load_config
from .evaluate import ALGORITHMS, SCHEMA_VERSION, run_frames, run_scenario
from .metrics import MetricsError, stats_from_errors
from .records import RecordError, read_frames, write_frames
from .scenario_file import load_scenario
from .simulator import simulate

log = logging.getLogger("radar_eot")

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2
SEED_MIN, SEED_MAX = -(2 ** 63), 2 ** 64 - 1


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; 2 is reserved for degenerate runs here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not SEED_MIN <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


def _counts(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("object counts must be positive")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="radar-eot", description="Radar extended-object tracking experiments.",
                epilog=f"Config fields can be overridden with {ENV_PREFIX}<SECTION>__<FIELD>=value.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="write simulated frames as JSON lines")
    s.add_argument("--scenario", required=True, help="built-in name (A, B, C, circle) or YAML file")
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--out", default="-", help="output file, '-' for stdout")

    r = sub.add_parser("run", help="run the pipeline on a scenario and score it")
    r.add_argument("--scenario", required=True, help="built-in name or YAML file")
    r.add_argument("--config", help="pipeline config YAML")
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--frames", help="replay recorded frames (JSON lines) instead of simulating")
    r.add_argument("--out", required=True, help="output directory")

    b = sub.add_parser("bench", help="per-frame runtime versus number of objects")
    b.add_argument("--scenario", help="time this scenario instead of the object-count sweep")
    b.add_argument("--config", help="pipeline config YAML")
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--objects", type=_counts, default=list(DEFAULT_COUNTS),
                   help="comma-separated object counts (default %(default)s)")
    b.add_argument("--out", help="also write the table as CSV")

    st = sub.add_parser("stats", help="speed-error statistics from a run's errors.csv")
    st.add_argument("source", help="run directory or errors.csv")
    st.add_argument("--out", default="-", help="CSV output, '-' for stdout")
    return p


def _open_out(path: str):
    if path == "-":
        return sys.stdout
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def cmd_simulate(args) -> int:
    sc = load_scenario(args.scenario)
    fh = _open_out(args.out)
    try:
        n = write_frames(simulate(sc, args.seed), fh, scenario=sc.label, seed=args.seed)
    finally:
        if fh is not sys.stdout:
            fh.close()
    log.info("wrote %d frames", n)
    return EXIT_OK


def _write_csv(fh, header, rows) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def _stats_rows(stats: dict) -> list[list]:
    rows = []
    for alg in ALGORITHMS:
        s = stats.get(alg)
        if s is not None:
            rows.append([SCHEMA_VERSION, alg, s["samples"], repr(s["mean"]), repr(s["median"]),
                         repr(s["variance"])])
    return rows


STATS_HEADER = ["schema_version", "algorithm", "samples", "mean", "median", "variance"]


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    sc = load_scenario(args.scenario)
    if args.frames:
        with open(args.frames) as fh:
            result = run_frames(read_frames(fh), sc, cfg, args.seed)
    else:
        result = run_scenario(sc, cfg, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = result.report()
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    with open(out / "trace.jsonl", "w") as fh:
        for rec in result.traces:
            fh.write(json.dumps({"schema_version": SCHEMA_VERSION, **rec}, sort_keys=True) + "\n")
    with open(out / "errors.csv", "w", newline="") as fh:
        _write_csv(fh, ["schema_version", "algorithm", "t", "target", "error"],
                   [[SCHEMA_VERSION, alg, repr(t), tid, repr(e)]
                    for alg in ALGORITHMS for t, tid, e in result.errors[alg]])
    with open(out / "stats.csv", "w", newline="") as fh:
        _write_csv(fh, STATS_HEADER, _stats_rows(report))
    timing = result.timing()
    timing["backend"] = KERNEL_BACKEND
    (out / "timing.json").write_text(json.dumps(timing, indent=2, sort_keys=True) + "\n")

    rls = report.get("rls")
    if rls:
        log.info("rls speed error: mean %.4f median %.4f variance %.4f (n=%d)",
                 rls["mean"], rls["median"], rls["variance"], rls["samples"])
    frac = result.degenerate_fraction
    if frac > cfg.degeneracy_limit:
        print(f"radar-eot: {result.degenerate} of {result.clusters} clusters degenerate "
              f"({frac:.1%} > limit {cfg.degeneracy_limit:.1%})", file=sys.stderr)
        return EXIT_DEGENERATE
    return EXIT_OK


BENCH_COLUMNS = ["objects", "frames", "clusters_mean", "velocity_mean_ms", "velocity_std_ms",
                 "pipeline_mean_ms", "pipeline_std_ms", "pipeline_p99_ms", "pipeline_max_ms"]


def cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if args.scenario:
        rows = [{"objects": None, **time_scenario(load_scenario(args.scenario), cfg, args.seed)}]
    else:
        rows = sweep(args.objects, cfg, args.seed)
    print(f"backend: {KERNEL_BACKEND}")
    print(" ".join(f"{c:>17}" for c in BENCH_COLUMNS))
    for r in rows:
        print(" ".join(f"{r[c]:>17.3f}" if isinstance(r[c], float) else f"{str(r[c]):>17}"
                       for c in BENCH_COLUMNS))
    if args.out:
        with _open_out(args.out) as fh:
            _write_csv(fh, ["schema_version", "backend"] + BENCH_COLUMNS,
                       [[SCHEMA_VERSION, KERNEL_BACKEND] + [r[c] for c in BENCH_COLUMNS] for r in rows])
    return EXIT_OK


def cmd_stats(args) -> int:
    src = Path(args.source)
    if src.is_dir():
        src = src / "errors.csv"
    per_alg: dict[str, list[float]] = {}
    with open(src, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"algorithm", "error"} <= set(reader.fieldnames):
            raise InputError(f"{src}: expected columns 'algorithm' and 'error'")
        for line_no, row in enumerate(reader, 2):
            try:
                per_alg.setdefault(row["algorithm"], []).append(float(row["error"]))
            except (TypeError, ValueError):
                raise InputError(f"{src}:{line_no}: bad error value {row['error']!r}") from None
    stats = {alg: stats_from_errors(v).as_dict() for alg, v in per_alg.items()}
    fh = _open_out(args.out)
    try:
        _write_csv(fh, STATS_HEADER, _stats_rows(stats))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "run": cmd_run, "bench": cmd_bench, "stats": cmd_stats}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, RecordError, InputError, MetricsError, OSError, yaml.YAMLError) as exc:
        print(f"radar-eot: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
