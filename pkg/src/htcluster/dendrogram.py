"""Merge trees shared by the hierarchy export and the agglomerative baseline.

Leaves are numbered ``0..leaf_count-1``; each merge creates a new internal
node numbered consecutively from ``leaf_count``. Agglomerative clustering
produces binary merges; the topological hierarchy may fuse three or more
nodes at one height.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class DendrogramMerge:
    height: float
    children: tuple[int, ...]

    def __post_init__(self):
        if len(self.children) < 2:
            raise InputError("a merge needs at least two children")


@dataclass(frozen=True)
class Dendrogram:
    """A merge tree with nondecreasing heights."""

    leaf_count: int
    merges: tuple[DendrogramMerge, ...]

    def __post_init__(self):
        heights = [m.height for m in self.merges]
        if any(b < a for a, b in zip(heights, heights[1:])):
            raise InputError("merge heights must be nondecreasing")
        seen = set()
        next_id = self.leaf_count
        for m in self.merges:
            for c in m.children:
                if c >= next_id or c in seen:
                    raise InputError("merge references an unavailable node")
                seen.add(c)
            next_id += 1

    @property
    def node_count(self) -> int:
        return self.leaf_count + len(self.merges)

    def leaves_under(self) -> list[tuple[int, ...]]:
        """Sorted leaf tuple for every node, indexed by node id."""
        groups: list[tuple[int, ...]] = [(i,) for i in range(self.leaf_count)]
        for m in self.merges:
            members: list[int] = []
            for c in m.children:
                members.extend(groups[c])
            groups.append(tuple(sorted(members)))
        return groups


def cophenetic_matrix(dend: Dendrogram) -> np.ndarray:
    """Pairwise heights at which leaves first share a node.

    The result is an ultrametric: every triangle has its two largest sides
    equal, because pair heights come from tree joins.
    """
    n = dend.leaf_count
    coph = np.zeros((n, n))
    groups: list[list[int]] = [[i] for i in range(n)]
    for m in dend.merges:
        parts = [groups[c] for c in m.children]
        for a in range(len(parts)):
            for b in range(a + 1, len(parts)):
                for i in parts[a]:
                    coph[i, parts[b]] = m.height
                    coph[parts[b], i] = m.height
        merged: list[int] = []
        for p in parts:
            merged.extend(p)
        groups.append(merged)
    return coph
