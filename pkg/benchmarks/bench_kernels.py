"""Compare the compiled and pure-Python kernels on representative inputs.

    python benchmarks/bench_kernels.py [--repeat 200]

Each kernel is fed identical arrays through both backends; the script checks
the outputs agree before reporting per-call times.
"""

from __future__ import annotations

import argparse
import sys
import timeit

import numpy as np

from radar_eot._kernels import available_backends


def rls_case(n_points: int, n_filters: int, rng: np.random.Generator):
    phi = rng.uniform(-0.6, 0.6, n_points)
    rr = 8.0 * np.cos(phi) + 1.5 * np.sin(phi) + rng.normal(0, 0.12, n_points)
    bad = rng.random(n_points) < 0.3
    rr[bad] += rng.choice([-1.0, 1.0], bad.sum()) * rng.uniform(1, 6, bad.sum())
    orders = np.argsort(rng.random((n_filters, n_points)), axis=1).astype(np.int64)
    return (phi, rr, orders, 7.0, 1.0, 30.0, 0.4, 3)


def dbscan_case(n_points: int, rng: np.random.Generator):
    pts = rng.uniform(0, 40, (n_points, 2))
    d = np.hypot(*(pts[:, None, :] - pts[None, :, :]).transpose(2, 0, 1))
    adj = (d < 1.5) & ~np.eye(n_points, dtype=bool)
    indptr = np.concatenate([[0], np.cumsum(adj.sum(1))]).astype(np.int64)
    indices = np.nonzero(adj)[1].astype(np.int64)
    return (n_points, indptr, indices, 3)


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, float), np.asarray(b, float), rtol=0, atol=1e-12, equal_nan=True)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    backends = available_backends()
    if "cython" not in backends:
        print("compiled extension not built; only the Python backend is available", file=sys.stderr)
    rng = np.random.default_rng(args.seed)
    cases = [
        ("rls_multi 40 pts x 10 filters", "rls_multi", rls_case(40, 10, rng)),
        ("rls_multi 200 pts x 10 filters", "rls_multi", rls_case(200, 10, rng)),
        ("dbscan_expand 300 pts", "dbscan_expand", dbscan_case(300, rng)),
        ("dbscan_expand 1500 pts", "dbscan_expand", dbscan_case(1500, rng)),
    ]
    print(f"{'case':34} " + " ".join(f"{b + ' us':>12}" for b in backends) + "   speedup")
    ok = True
    for label, name, case in cases:
        outs, times = {}, {}
        for b, mod in backends.items():
            fn = getattr(mod, name)
            outs[b] = fn(*case)
            n = max(1, args.repeat // (20 if b == "python" else 1))
            times[b] = min(timeit.repeat(lambda: fn(*case), number=n, repeat=3)) / n * 1e6
        if len(outs) == 2 and not same(outs["python"], outs["cython"]):
            ok = False
            label += " (MISMATCH)"
        speed = f"{times['python'] / times['cython']:8.1f}x" if "cython" in times else ""
        print(f"{label:34} " + " ".join(f"{times[b]:12.1f}" for b in backends) + "  " + speed)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
