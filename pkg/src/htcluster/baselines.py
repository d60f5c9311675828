"""Comparison algorithms: k-means, agglomerative clustering, DBSCAN.

These operate on the same :class:`~htcluster.distance.PointCloud` and
:class:`~htcluster.distance.DistanceMatrix` types as the hierarchy module
and are deterministic given their inputs (and seed, for k-means).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dendrogram import Dendrogram, DendrogramMerge, cophenetic_matrix
from .distance import DistanceMatrix, PointCloud
from .errors import DegenerateInputError, InputError

LINKAGES = ("complete", "average", "weighted", "single")

NOISE = -1


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray  # item -> cluster id
    centroids: np.ndarray
    objective: float  # sum of squared distances to assigned centroids
    iterations: int
    seed: int
    objective_trace: tuple[float, ...]


def _sq_dists_to_centroids(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    return ((x[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)


def kmeans(pc: PointCloud, k: int, seed: int = 0, max_iter: int = 300) -> KMeansResult:
    """Lloyd iteration from ``k`` seeded distinct data points.

    Stops when the assignment is stable or ``max_iter`` is reached. The
    recorded objective (total squared Euclidean distance to the assigned
    centroid) is nonincreasing across iterations. A cluster that loses all
    its points is re-seeded at the data point farthest from its centroid so
    the cluster count stays ``k``.
    """
    if not 1 <= k <= pc.n:
        raise InputError(f"k must be in [1, {pc.n}]")
    x = pc.coords
    rng = np.random.default_rng(seed)
    centroids = x[np.sort(rng.choice(pc.n, size=k, replace=False))].copy()
    prev = None
    trace: list[float] = []
    iterations = 0
    for _ in range(int(max_iter)):
        d2 = _sq_dists_to_centroids(x, centroids)
        assign = d2.argmin(axis=1)
        if prev is not None and np.array_equal(assign, prev):
            break
        iterations += 1
        for j in range(k):
            members = assign == j
            if members.any():
                centroids[j] = x[members].mean(axis=0)
            else:
                centroids[j] = x[int(d2[:, j].argmax())]
        trace.append(float(((x - centroids[assign]) ** 2).sum()))
        prev = assign
    if prev is None:  # max_iter == 0
        d2 = _sq_dists_to_centroids(x, centroids)
        prev = d2.argmin(axis=1)
        trace.append(float(((x - centroids[prev]) ** 2).sum()))
    return KMeansResult(
        assignments=prev,
        centroids=centroids,
        objective=trace[-1],
        iterations=iterations,
        seed=int(seed),
        objective_trace=tuple(trace),
    )


def hc_agglomerative(dm: DistanceMatrix, linkage: str = "average") -> Dendrogram:
    """Agglomerative clustering with the requested linkage function.

    At each of the ``n - 1`` steps the pair of clusters at minimal linkage
    distance merges; the merge height is that distance. Cluster distances
    update as: minimum cross distance (``single``), maximum (``complete``),
    mean over all cross pairs (``average``), or the plain mean of the two
    merged clusters' distances (``weighted``). Ties pick the pair whose
    (smaller, larger) representative indices come first.
    """
    if linkage not in LINKAGES:
        raise InputError(f"unknown linkage {linkage!r}; choose from {LINKAGES}")
    n = dm.n
    if n < 2:
        raise InputError("need at least two items")
    d = dm.values.copy()
    np.fill_diagonal(d, np.inf)
    active = list(range(n))
    node_id = list(range(n))
    rep = list(range(n))
    size = [1] * n
    merges: list[DendrogramMerge] = []
    next_id = n
    for _ in range(n - 1):
        sub = d[np.ix_(active, active)]
        dmin = sub.min()
        ties = np.argwhere(sub == dmin)
        best = None
        for a, b in ties:
            if a >= b:
                continue
            ra, rb = rep[active[a]], rep[active[b]]
            key = (min(ra, rb), max(ra, rb))
            if best is None or key < best[0]:
                best = (key, int(a), int(b))
        _, a, b = best
        ia, ib = active[a], active[b]
        merges.append(DendrogramMerge(height=float(dmin), children=(node_id[ia], node_id[ib])))
        # fold cluster b into slot a, then update distances to the rest
        for other in active:
            if other in (ia, ib):
                continue
            da, db = d[ia, other], d[ib, other]
            if linkage == "single":
                nd = min(da, db)
            elif linkage == "complete":
                nd = max(da, db)
            elif linkage == "average":
                nd = (size[ia] * da + size[ib] * db) / (size[ia] + size[ib])
            else:  # weighted
                nd = (da + db) / 2.0
            # the true updated distance is >= the merge height; guard the
            # averaged variants against rounding a hair below it
            d[ia, other] = d[other, ia] = max(nd, dmin)
        size[ia] += size[ib]
        rep[ia] = min(rep[ia], rep[ib])
        node_id[ia] = next_id
        next_id += 1
        active.remove(ib)
    return Dendrogram(leaf_count=n, merges=tuple(merges))


def cophenetic_correlation(dm: DistanceMatrix, dend: Dendrogram) -> float:
    """Pearson correlation between input distances and dendrogram join heights."""
    if dend.leaf_count != dm.n:
        raise InputError("dendrogram and distance matrix sizes differ")
    if dm.n < 3:
        raise InputError("need at least three items")
    iu = np.triu_indices(dm.n, k=1)
    orig = dm.values[iu]
    coph = cophenetic_matrix(dend)[iu]
    so, sc = orig.std(), coph.std()
    if so == 0 or sc == 0:
        raise DegenerateInputError("degenerate: zero variance in distances or heights")
    return float(np.corrcoef(orig, coph)[0, 1])


def select_best_linkage(dm: DistanceMatrix) -> tuple[str, float]:
    """Linkage with the highest cophenetic correlation on this matrix.

    Linkages whose dendrograms degenerate (all join heights equal) are
    skipped; ties keep the earlier entry of ``LINKAGES``. Raises only when
    every linkage degenerates.
    """
    best: tuple[str, float] | None = None
    for linkage in LINKAGES:
        try:
            coefficient = cophenetic_correlation(dm, hc_agglomerative(dm, linkage))
        except DegenerateInputError:
            continue
        if best is None or coefficient > best[1]:
            best = (linkage, coefficient)
    if best is None:
        raise DegenerateInputError("degenerate: no linkage produced varying heights")
    return best


@dataclass(frozen=True)
class DbscanResult:
    assignments: np.ndarray  # item -> cluster id, NOISE (-1) for unassigned
    eps: float
    min_pts: int
    core: np.ndarray  # item -> bool

    @property
    def n_clusters(self) -> int:
        ids = self.assignments[self.assignments != NOISE]
        return int(ids.max()) + 1 if ids.size else 0


def dbscan(dm: DistanceMatrix, eps: float, min_pts: int) -> DbscanResult:
    """Density clustering with strict ``< eps`` neighbourhoods.

    A point is core when its neighbourhood (itself included) holds at least
    ``min_pts`` points. Clusters grow breadth-first from core points in
    ascending index order; border points keep the first cluster that
    reaches them; everything else is noise.
    """
    if not eps > 0:
        raise InputError("eps must be positive")
    if min_pts < 1:
        raise InputError("min_pts must be >= 1")
    n = dm.n
    linked = dm.values < eps  # diagonal is True: d(i, i) = 0 < eps
    core = linked.sum(axis=1) >= min_pts
    labels = np.full(n, NOISE, dtype=np.int64)
    cid = 0
    for start in range(n):
        if labels[start] != NOISE or not core[start]:
            continue
        labels[start] = cid
        queue = deque([start])
        while queue:
            u = queue.popleft()
            if not core[u]:
                continue
            for v in np.flatnonzero(linked[u]):
                if labels[v] == NOISE:
                    labels[int(v)] = cid
                    queue.append(int(v))
        cid += 1
    return DbscanResult(assignments=labels, eps=float(eps), min_pts=int(min_pts), core=core)
