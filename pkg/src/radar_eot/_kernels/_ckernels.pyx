# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, fabs, NAN

cnp.import_array()


def rls_multi(phi, rr, orders, double v0x, double v0y, double p0,
              double threshold, long warmup):
    cdef cnp.ndarray[double, ndim=1] phi_a = np.ascontiguousarray(phi, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] rr_a = np.ascontiguousarray(rr, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=2] ord_a = np.ascontiguousarray(orders, dtype=np.int64)
    cdef Py_ssize_t k = ord_a.shape[0]
    cdef Py_ssize_t n = ord_a.shape[1]
    cdef cnp.ndarray[double, ndim=1] c = np.cos(phi_a)
    cdef cnp.ndarray[double, ndim=1] s = np.sin(phi_a)
    cdef cnp.ndarray[double, ndim=2] v_out = np.empty((k, 2))
    cdef cnp.ndarray[double, ndim=2] p_out = np.empty((k, 3))
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cnt_out = np.zeros(k, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2, cast=True] inl_out = np.zeros((k, n), dtype=bool)
    cdef cnp.ndarray[double, ndim=1] rep_out = np.empty(k)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ninl_out = np.zeros(k, dtype=np.int64)
    cdef double vx, vy, p00, p01, p11, cj, sj, g0, g1, den, e, dvx, dvy, tot
    cdef Py_ssize_t f, i, j
    cdef long count

    for f in range(k):
        vx = v0x
        vy = v0y
        p00 = p0
        p01 = 0.0
        p11 = p0
        count = 0
        for i in range(n):
            j = ord_a[f, i]
            cj = c[j]
            sj = s[j]
            g0 = p00 * cj + p01 * sj
            g1 = p01 * cj + p11 * sj
            den = 1.0 + cj * g0 + sj * g1
            e = rr_a[j] - (cj * vx + sj * vy)
            dvx = g0 / den * e
            dvy = g1 / den * e
            if count >= warmup and (fabs(dvx) > threshold or fabs(dvy) > threshold):
                continue
            vx += dvx
            vy += dvy
            p00 -= g0 * g0 / den
            p01 -= g0 * g1 / den
            p11 -= g1 * g1 / den
            count += 1
            inl_out[f, j] = 1
        v_out[f, 0] = vx
        v_out[f, 1] = vy
        p_out[f, 0] = p00
        p_out[f, 1] = p01
        p_out[f, 2] = p11
        cnt_out[f] = count
        ninl_out[f] = count
        if count:
            tot = 0.0
            for j in range(n):
                if inl_out[f, j]:
                    tot += fabs(c[j] * vx + s[j] * vy - rr_a[j])
            rep_out[f] = tot / count
        else:
            rep_out[f] = NAN
    return v_out, p_out, cnt_out, inl_out.view(bool), rep_out, ninl_out


def dbscan_expand(Py_ssize_t n, indptr, indices, long min_pts):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] comp = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] labels = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] stack = np.empty(max(n, 1), dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] remap = np.full(max(n, 1), -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] core = np.zeros(max(n, 1), dtype=np.uint8)
    cdef Py_ssize_t i, j, q, top, best, nxt
    for i in range(n):
        if ip[i + 1] - ip[i] + 1 >= min_pts:
            core[i] = 1
    # core components, rooted at their lowest core index
    for i in range(n):
        if not core[i] or comp[i] >= 0:
            continue
        comp[i] = i
        top = 0
        stack[top] = i
        top += 1
        while top:
            top -= 1
            q = stack[top]
            for j in range(ip[q], ip[q + 1]):
                nxt = ix[j]
                if core[nxt] and comp[nxt] < 0:
                    comp[nxt] = i
                    stack[top] = nxt
                    top += 1
    for i in range(n):
        if core[i]:
            continue
        best = -1
        for j in range(ip[i], ip[i + 1]):
            nxt = ix[j]
            if core[nxt] and (best < 0 or nxt < best):
                best = nxt
        if best >= 0:
            comp[i] = comp[best]
    nxt = 0
    for i in range(n):
        if comp[i] >= 0:
            if remap[comp[i]] < 0:
                remap[comp[i]] = nxt
                nxt += 1
            labels[i] = remap[comp[i]]
    return labels
