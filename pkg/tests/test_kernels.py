"""Compiled and pure-Python kernels must agree."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from radar_eot import _kernels

BACKENDS = _kernels.available_backends()
needs_both = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled kernels not built")


def test_backend_name_is_known():
    assert _kernels.BACKEND in BACKENDS


@needs_both
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.integers(1, 12), st.integers(0, 5),
       st.sampled_from([0.05, 0.4, 2.0, float("inf")]), st.floats(0.1, 1e4))
def test_rls_multi_backends_agree(seed, n, k, warmup, thr, p0):
    rng = np.random.default_rng(seed)
    phi = rng.uniform(-np.pi, np.pi, n)
    rr = rng.normal(0, 5, n)
    orders = np.argsort(rng.random((k, n)), axis=1)
    args = (phi, rr, orders, float(rng.normal()), float(rng.normal()), p0, thr, warmup)
    a = BACKENDS["python"].rls_multi(*args)
    b = BACKENDS["cython"].rls_multi(*args)
    for x, y in zip(a, b):
        np.testing.assert_allclose(np.asarray(x, float), np.asarray(y, float), rtol=0, atol=1e-12)


@needs_both
@given(st.integers(0, 2**32 - 1), st.integers(0, 60), st.floats(0.2, 4), st.integers(1, 5))
def test_dbscan_expand_backends_agree(seed, n, radius, min_pts):
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0, 15, (n, 2))
    d = np.hypot(*(xy[:, None] - xy[None]).transpose(2, 0, 1)) if n else np.zeros((0, 0))
    adj = (d <= radius) & ~np.eye(n, dtype=bool)
    indptr = np.concatenate([[0], np.cumsum(adj.sum(1))]).astype(np.int64)
    indices = np.nonzero(adj)[1].astype(np.int64)
    a = BACKENDS["python"].dbscan_expand(n, indptr, indices, min_pts)
    b = BACKENDS["cython"].dbscan_expand(n, indptr, indices, min_pts)
    assert np.array_equal(a, b)


def test_pure_python_selected_by_environment():
    import subprocess
    import sys
    code = "from radar_eot import KERNEL_BACKEND; print(KERNEL_BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                         env={"RADAR_EOT_PURE_PYTHON": "1", "PATH": ""}, check=True)
    assert out.stdout.strip() == "python"
