"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: component
structure comes from a fresh union-find over explicit adjacency, minimax
path levels from a hand-rolled Prim tree, and so on.
"""
from __future__ import annotations

import numpy as np
import pytest

from htcluster import DistanceMatrix, PointCloud, euclidean_matrix


class OracleUnionFind:
    """Independent union-find (union by size, no path compression)."""

    def __init__(self, n):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, x):
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True

    def canonical(self):
        groups = {}
        for i in range(len(self.parent)):
            groups.setdefault(self.find(i), []).append(i)
        return tuple(tuple(sorted(g)) for g in sorted(groups.values(), key=lambda g: g[0]))


def threshold_components(dvals: np.ndarray, r: float, strict: bool = False):
    """Connected components of the distance-threshold graph, via union-find."""
    n = dvals.shape[0]
    uf = OracleUnionFind(n)
    for i in range(n):
        for j in range(i + 1, n):
            linked = dvals[i, j] < r if strict else dvals[i, j] <= r
            if linked:
                uf.union(i, j)
    return uf.canonical()


def prim_mst_edges(dvals: np.ndarray):
    """Minimum spanning tree edges (i, j, weight) by Prim's algorithm."""
    n = dvals.shape[0]
    in_tree = [False] * n
    best = dvals[0].copy()
    best_from = np.zeros(n, dtype=int)
    in_tree[0] = True
    edges = []
    for _ in range(n - 1):
        cand = [(best[v], v) for v in range(n) if not in_tree[v]]
        _, v = min(cand)
        edges.append((int(best_from[v]), v, float(best[v])))
        in_tree[v] = True
        for u in range(n):
            if not in_tree[u] and dvals[v, u] < best[u]:
                best[u] = dvals[v, u]
                best_from[u] = v
    return edges


def minimax_matrix(dvals: np.ndarray) -> np.ndarray:
    """Pairwise minimax path distances (largest MST edge on the connecting path)."""
    n = dvals.shape[0]
    edges = sorted(prim_mst_edges(dvals), key=lambda e: e[2])
    out = np.zeros((n, n))
    uf = OracleUnionFind(n)
    members = {i: [i] for i in range(n)}
    for i, j, wt in edges:
        ra, rb = uf.find(i), uf.find(j)
        for a in members[ra]:
            for b in members[rb]:
                out[a, b] = out[b, a] = wt
        uf.union(ra, rb)
        root = uf.find(ra)
        merged = members.pop(ra) + members.pop(rb)
        members[root] = merged
    return out


def random_cloud(rng, n=None, dim=None) -> PointCloud:
    n = int(rng.integers(5, 40)) if n is None else n
    dim = int(rng.integers(1, 5)) if dim is None else dim
    return PointCloud(rng.random((n, dim)) * rng.uniform(0.5, 20.0))


def random_distance_matrix(rng, n) -> DistanceMatrix:
    return euclidean_matrix(random_cloud(rng, n=n))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
