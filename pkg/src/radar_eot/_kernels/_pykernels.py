"""Pure-Python reference kernels.

Semantics are identical to the compiled versions in ``_ckernels.pyx``; the
test-suite checks both against each other.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components


def rls_multi(phi, rr, orders, v0x, v0y, p0, threshold, warmup):
    """Run one RLS filter per row of ``orders`` over the same points.

    Returns ``(v, p, n_updates, inlier, reproj, n_inlier)`` where ``p`` holds
    ``(p00, p01, p11)`` per filter and ``reproj`` is the mean absolute
    range-rate residual over the filter's inliers (nan if it has none).
    """
    phi = np.asarray(phi, dtype=float)
    rr = np.asarray(rr, dtype=float)
    orders = np.asarray(orders, dtype=np.int64)
    k, n = orders.shape
    c = np.cos(phi).tolist()
    s = np.sin(phi).tolist()
    r = rr.tolist()
    v_out = np.empty((k, 2))
    p_out = np.empty((k, 3))
    cnt_out = np.zeros(k, dtype=np.int64)
    inl_out = np.zeros((k, n), dtype=bool)
    rep_out = np.full(k, np.nan)
    ninl_out = np.zeros(k, dtype=np.int64)

    for f in range(k):
        vx, vy = float(v0x), float(v0y)
        p00, p01, p11 = float(p0), 0.0, float(p0)
        count = 0
        for j in orders[f].tolist():
            cj, sj = c[j], s[j]
            g0 = p00 * cj + p01 * sj
            g1 = p01 * cj + p11 * sj
            den = 1.0 + cj * g0 + sj * g1
            e = r[j] - (cj * vx + sj * vy)
            dvx = g0 / den * e
            dvy = g1 / den * e
            if count >= warmup and (abs(dvx) > threshold or abs(dvy) > threshold):
                continue
            vx += dvx
            vy += dvy
            p00 -= g0 * g0 / den
            p01 -= g0 * g1 / den
            p11 -= g1 * g1 / den
            count += 1
            inl_out[f, j] = True
        v_out[f] = vx, vy
        p_out[f] = p00, p01, p11
        cnt_out[f] = count
        ninl_out[f] = count
        if count:
            tot = 0.0
            for j in range(n):
                if inl_out[f, j]:
                    tot += abs(c[j] * vx + s[j] * vy - r[j])
            rep_out[f] = tot / count
    return v_out, p_out, cnt_out, inl_out, rep_out, ninl_out


def dbscan_expand(n, indptr, indices, min_pts):
    """Cluster labels from a symmetric neighbour graph in CSR form.

    ``indices`` excludes self-loops; a point is core when it has at least
    ``min_pts - 1`` neighbours. Border points join the cluster of their
    lowest-index core neighbour. Clusters are numbered by their lowest member
    index; noise is -1.
    """
    indptr = np.asarray(indptr, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    labels = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return labels
    deg = np.diff(indptr)
    core = deg + 1 >= min_pts
    rows = np.repeat(np.arange(n), deg)
    keep = core[rows] & core[indices]
    g = csr_matrix((np.ones(int(keep.sum())), (rows[keep], indices[keep])), shape=(n, n))
    _, comp = connected_components(g, directed=False)
    core_idx = np.flatnonzero(core)
    # renumber components by their lowest core member
    first = {}
    for i in core_idx.tolist():
        first.setdefault(int(comp[i]), i)
    core_label = np.full(n, -1, dtype=np.int64)
    for i in core_idx.tolist():
        core_label[i] = first[int(comp[i])]
    for i in np.flatnonzero(~core).tolist():
        nb = indices[indptr[i]:indptr[i + 1]]
        nb = nb[core[nb]]
        if len(nb):
            core_label[i] = core_label[nb.min()]
    # border points may carry a lower index than the core that owns the
    # cluster, so order labels by the lowest index of any member
    roots = {}
    for i in range(n):
        lab = int(core_label[i])
        if lab >= 0 and lab not in roots:
            roots[lab] = len(roots)
    for i in range(n):
        if core_label[i] >= 0:
            labels[i] = roots[int(core_label[i])]
    return labels

