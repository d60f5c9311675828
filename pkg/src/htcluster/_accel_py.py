"""Pure Python fallback kernels.

Same contracts (including float semantics) as the compiled versions in
``_accel.pyx``; see ``htcluster.accel`` for backend selection.
"""
from __future__ import annotations

import numpy as np


def threshold_sweep(i_idx, j_idx, w, levels, n, strict):
    """Sweep a sorted edge list across increasing threshold levels.

    Parameters
    ----------
    i_idx, j_idx : int64 arrays
        Edge endpoints, sorted so that ``w`` is nondecreasing.
    w : float64 array
        Edge weights, nondecreasing.
    levels : float64 array
        Increasing threshold values; level m admits edges with
        ``w <= levels[m]`` (or ``<`` when ``strict``).
    n : int
        Number of vertices.
    strict : bool
        Use the strict inequality for the link predicate.

    Returns
    -------
    (union_level, union_i, union_j, evals_per_level, levels_emitted)
        One entry per component-joining edge, the number of edge/threshold
        predicate evaluations spent at each emitted level, and the count of
        emitted levels (the sweep stops after the first level at which a
        single component remains).
    """
    i_idx = np.asarray(i_idx, dtype=np.int64)
    j_idx = np.asarray(j_idx, dtype=np.int64)
    w = np.asarray(w, dtype=np.float64)
    levels = np.asarray(levels, dtype=np.float64)
    ne = w.shape[0]
    nl = levels.shape[0]

    parent = list(range(n))

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    out_level = []
    out_i = []
    out_j = []
    evals = np.zeros(nl, dtype=np.int64)
    pos = 0
    components = n
    emitted = 0
    for m in range(nl):
        r = levels[m]
        cnt = 0
        while pos < ne:
            cnt += 1
            wv = w[pos]
            if (wv >= r) if strict else (wv > r):
                break
            a = find(int(i_idx[pos]))
            b = find(int(j_idx[pos]))
            if a != b:
                if a > b:
                    a, b = b, a
                parent[b] = a
                components -= 1
                out_level.append(m)
                out_i.append(int(i_idx[pos]))
                out_j.append(int(j_idx[pos]))
            pos += 1
        evals[m] = cnt
        emitted = m + 1
        if components == 1:
            break
    return (
        np.asarray(out_level, dtype=np.int64),
        np.asarray(out_i, dtype=np.int64),
        np.asarray(out_j, dtype=np.int64),
        evals[:emitted].copy(),
        emitted,
    )


def dijkstra_all_sources(weights):
    """All-sources shortest path distances on a dense nonnegative graph.

    Path costs accumulate left to right from the source, so results are
    bit-reproducible against any other implementation using the same
    accumulation order. Rows are per-source distance vectors.
    """
    wmat = np.asarray(weights, dtype=np.float64)
    n = wmat.shape[0]
    out = np.empty((n, n), dtype=np.float64)
    for s in range(n):
        dist = np.full(n, np.inf)
        dist[s] = 0.0
        done = np.zeros(n, dtype=bool)
        for _ in range(n):
            u = int(np.argmin(np.where(done, np.inf, dist)))
            if done[u] or not np.isfinite(dist[u]):
                break
            done[u] = True
            cand = dist[u] + wmat[u]
            np.copyto(dist, cand, where=(cand < dist) & ~done)
        out[s] = dist
    return out
