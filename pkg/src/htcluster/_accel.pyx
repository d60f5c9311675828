# cython: language_level=3
"""Compiled kernels: threshold sweep and dense all-sources Dijkstra.

Behaviour (including float accumulation order) matches the pure Python
fallbacks in ``_accel_py.py`` bit for bit.
"""

import numpy as np

cimport cython
from libc.math cimport INFINITY


@cython.boundscheck(False)
@cython.wraparound(False)
cdef long _find(long[::1] parent, long x) nogil:
    cdef long root = x
    cdef long nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@cython.boundscheck(False)
@cython.wraparound(False)
def threshold_sweep(i_idx, j_idx, w, levels, n, strict):
    """See ``htcluster._accel_py.threshold_sweep``."""
    cdef const long[::1] iv = np.ascontiguousarray(i_idx, dtype=np.int64)
    cdef const long[::1] jv = np.ascontiguousarray(j_idx, dtype=np.int64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef const double[::1] lv = np.ascontiguousarray(levels, dtype=np.float64)
    cdef long nn = n
    cdef bint use_strict = bool(strict)
    cdef Py_ssize_t ne = wv.shape[0]
    cdef Py_ssize_t nl = lv.shape[0]

    parent_arr = np.arange(nn, dtype=np.int64)
    cdef long[::1] parent = parent_arr
    out_level_arr = np.empty(nn, dtype=np.int64)
    out_i_arr = np.empty(nn, dtype=np.int64)
    out_j_arr = np.empty(nn, dtype=np.int64)
    cdef long[::1] out_level = out_level_arr
    cdef long[::1] out_i = out_i_arr
    cdef long[::1] out_j = out_j_arr
    evals_arr = np.zeros(nl, dtype=np.int64)
    cdef long[::1] evals = evals_arr

    cdef Py_ssize_t pos = 0
    cdef Py_ssize_t m
    cdef long components = nn
    cdef long emitted = 0
    cdef long nu = 0
    cdef long cnt, a, b
    cdef double r, weight
    cdef bint stop

    for m in range(nl):
        r = lv[m]
        cnt = 0
        while pos < ne:
            cnt += 1
            weight = wv[pos]
            if use_strict:
                stop = weight >= r
            else:
                stop = weight > r
            if stop:
                break
            a = _find(parent, iv[pos])
            b = _find(parent, jv[pos])
            if a != b:
                if a > b:
                    a, b = b, a
                parent[b] = a
                components -= 1
                out_level[nu] = m
                out_i[nu] = iv[pos]
                out_j[nu] = jv[pos]
                nu += 1
            pos += 1
        evals[m] = cnt
        emitted = m + 1
        if components == 1:
            break
    return (
        out_level_arr[:nu].copy(),
        out_i_arr[:nu].copy(),
        out_j_arr[:nu].copy(),
        evals_arr[:emitted].copy(),
        int(emitted),
    )


@cython.boundscheck(False)
@cython.wraparound(False)
def dijkstra_all_sources(weights):
    """See ``htcluster._accel_py.dijkstra_all_sources``."""
    wmat_arr = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[:, ::1] wmat = wmat_arr
    cdef Py_ssize_t n = wmat.shape[0]
    out_arr = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    dist_arr = np.empty(n, dtype=np.float64)
    done_arr = np.empty(n, dtype=np.uint8)
    cdef double[::1] dist = dist_arr
    cdef unsigned char[::1] done = done_arr
    cdef Py_ssize_t s, it, u, v
    cdef double best, cand

    for s in range(n):
        for v in range(n):
            dist[v] = INFINITY
            done[v] = 0
        dist[s] = 0.0
        for it in range(n):
            u = -1
            best = INFINITY
            for v in range(n):
                if not done[v] and dist[v] < best:
                    best = dist[v]
                    u = v
            if u < 0:
                break
            done[u] = 1
            for v in range(n):
                if not done[v]:
                    cand = dist[u] + wmat[u, v]
                    if cand < dist[v]:
                        dist[v] = cand
        for v in range(n):
            out[s, v] = dist[v]
    return out_arr
