"""Point clouds, distance matrices and the point-set distance functions.

Two metrics are provided on coordinate data: the plain Euclidean distance
and the set-relative path-power distance, where the cost of travelling
between two items is minimised over polygonal paths through the other items
of the same set, each hop priced at its Euclidean length raised to a power
``alpha``. Precomputed dissimilarity matrices are accepted everywhere else
in the toolkit, so no triangle inequality is assumed on
:class:`DistanceMatrix`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .accel import dijkstra_all_sources
from .errors import InputError


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class PointCloud:
    """Items embedded in a real feature space, one row per item."""

    coords: np.ndarray
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[0] < 1 or coords.shape[1] < 1:
            raise InputError("point cloud must be a 2-D array with at least one row and column")
        if not np.all(np.isfinite(coords)):
            raise InputError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "coords", _readonly(coords))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != coords.shape[0]:
                raise InputError("label count does not match point count")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric nonnegative pairwise dissimilarities with a zero diagonal."""

    values: np.ndarray
    labels: tuple[str, ...] | None = None
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise InputError("distance matrix must be square")
        if self.validate:
            if not np.all(np.isfinite(values)):
                raise InputError("distance matrix contains non-finite entries")
            if np.any(values < 0):
                raise InputError("distance matrix contains negative entries")
            if np.any(np.diagonal(values) != 0):
                raise InputError("distance matrix diagonal must be zero")
            if not np.array_equal(values, values.T):
                raise InputError("distance matrix must be symmetric")
        object.__setattr__(self, "values", _readonly(values))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != values.shape[0]:
                raise InputError("label count does not match matrix size")
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def euclidean_matrix(pc: PointCloud) -> DistanceMatrix:
    """Pairwise Euclidean distances between the rows of a point cloud."""
    x = pc.coords
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    # mirror the upper triangle so the result is exactly symmetric
    iu = np.triu_indices(pc.n, k=1)
    out = np.zeros_like(d)
    out[iu] = d[iu]
    out += out.T
    return DistanceMatrix(out, labels=pc.labels, validate=False)


def _direct_edge_weights(pc: PointCloud, alpha: float) -> np.ndarray:
    # hop prices: the Euclidean distances raised elementwise to alpha
    d = euclidean_matrix(pc).values
    if alpha == 1.0:
        return d.copy()
    return d**alpha


def fermat_matrix(pc: PointCloud, alpha: float, neighbors: int | None = None) -> DistanceMatrix:
    """Set-relative path-power distances between the items of a point cloud.

    The distance between two items is the minimum over paths through the
    point set of the sum of Euclidean hop lengths raised to ``alpha``. With
    ``alpha = 1`` this reduces to the Euclidean distance. ``neighbors``
    optionally sparsifies the hop graph to each item's ``k`` nearest
    neighbours (a faster approximation; exact, complete-graph search is the
    default).

    Parameters
    ----------
    pc : PointCloud
    alpha : float
        Hop cost exponent, ``>= 1``.
    neighbors : int, optional
        If given, restrict hops to the symmetrised k-nearest-neighbour graph.
    """
    if alpha < 1.0:
        raise InputError("alpha must be >= 1")
    if pc.n < 2:
        raise InputError("need at least two points")
    w = _direct_edge_weights(pc, float(alpha))
    if neighbors is not None:
        k = int(neighbors)
        if k < 1:
            raise InputError("neighbors must be >= 1")
        keep = np.zeros_like(w, dtype=bool)
        order = np.argsort(w, axis=1, kind="stable")
        for i in range(pc.n):
            picked = 0
            for j in order[i]:
                if j == i:
                    continue
                keep[i, j] = True
                picked += 1
                if picked >= k:
                    break
        keep |= keep.T
        w = np.where(keep, w, np.inf)
        np.fill_diagonal(w, 0.0)
    dist = dijkstra_all_sources(w)
    if not np.all(np.isfinite(dist)):
        raise InputError("neighbor graph is disconnected; increase neighbors")
    # lower-index source wins both triangle halves: exact symmetry
    iu = np.triu_indices(pc.n, k=1)
    out = np.zeros_like(dist)
    out[iu] = dist[iu]
    out += out.T
    return DistanceMatrix(out, labels=pc.labels, validate=False)
