"""Connectivity-filtration clustering with full membership tracking.

A distance matrix induces a one-parameter family of threshold graphs: two
items are linked at scale ``r`` when their distance is at most ``r``. The
connected components of those graphs, swept over a finite grid of scales,
form a hierarchy of clusters. Items or groups that stay disconnected from
the bulk until large scales are natural outlier candidates; the component
count per scale and the lifetime of each component (the barcode) summarise
the structure.

The sweep is implemented as a sorted-edge union-find pass, which produces
exactly the per-level components of the threshold graphs while touching
each pair at most once; per-level work is skipped automatically whenever no
new links appear, and the sweep stops at the first level with a single
cluster.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import accel
from .dendrogram import Dendrogram, DendrogramMerge
from .distance import DistanceMatrix
from .errors import DegenerateInputError, InputError

DEFAULT_MAX_STEPS = 10_000


@dataclass(frozen=True)
class FiltrationGrid:
    """Uniform grid of threshold scales ``r_m = m * step`` for ``m = 0..step_count``."""

    r_max: float
    r_min: float
    step_count: int
    step: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] != self.step_count + 1:
            raise InputError("grid must hold step_count + 1 values")
        if values[0] != 0.0 or np.any(np.diff(values) <= 0):
            raise InputError("grid values must increase strictly from 0")
        if values[-1] != self.r_max:
            raise InputError("grid must end at r_max")
        out = values.copy()
        out.flags.writeable = False
        object.__setattr__(self, "values", out)


@dataclass(frozen=True)
class ExactFiltration:
    """Filtration through every distinct positive pairwise distance.

    Cluster merges then happen at exact distance values rather than at the
    next uniform grid point, which makes merge levels comparable with
    single-linkage heights without quantisation error.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.shape[0] < 2:
            raise InputError("exact filtration needs at least two values")
        if values[0] != 0.0 or np.any(np.diff(values) <= 0):
            raise InputError("filtration values must increase strictly from 0")
        out = values.copy()
        out.flags.writeable = False
        object.__setattr__(self, "values", out)

    @property
    def r_max(self) -> float:
        return float(self.values[-1])

    @property
    def r_min(self) -> float:
        return float(self.values[1])

    @property
    def step_count(self) -> int:
        return self.values.shape[0] - 1


@dataclass(frozen=True)
class Partition:
    """Disjoint clusters covering every item at one filtration level."""

    level: float
    clusters: tuple[tuple[int, ...], ...]

    @property
    def representatives(self) -> tuple[int, ...]:
        return tuple(c[0] for c in self.clusters)

    def member_count(self) -> int:
        return sum(len(c) for c in self.clusters)


@dataclass(frozen=True)
class MergeEvent:
    """A set of clusters fusing into one at a filtration level."""

    level: float
    absorbed: tuple[int, ...]  # representatives of the fused clusters
    result: int  # representative of the union (smallest member)


@dataclass(frozen=True)
class Bar:
    """Lifetime of one connected component, owned by its eldest item."""

    birth: float
    death: float  # math.inf for a surviving component
    representative: int


@dataclass(frozen=True)
class Barcode:
    intervals: tuple[Bar, ...]

    def alive_at(self, r: float) -> int:
        return sum(1 for bar in self.intervals if bar.death > r)


@dataclass(frozen=True)
class ClusterHierarchy:
    """Per-level partitions plus the merge events that connect them."""

    grid: FiltrationGrid | ExactFiltration
    levels: tuple[Partition, ...]
    merges: tuple[MergeEvent, ...]
    n_items: int
    strict_links: bool = False
    predicate_evaluations_per_level: tuple[int, ...] = field(default=(), repr=False)

    @property
    def predicate_evaluations(self) -> int:
        return sum(self.predicate_evaluations_per_level)

    @property
    def final_cluster_count(self) -> int:
        return len(self.levels[-1].clusters)

    def cluster_counts(self) -> tuple[int, ...]:
        return tuple(len(p.clusters) for p in self.levels)


def build_filtration_grid(dm: DistanceMatrix, max_steps: int | None = None) -> FiltrationGrid:
    """Uniform scale grid from 0 to the cloud diameter.

    The step count is the diameter divided by the smallest positive pairwise
    distance, rounded down, so one step roughly resolves the closest pair;
    it is capped at ``max_steps`` (default 10000) to bound the sweep cost on
    data with a huge spread of scales.
    """
    if dm.n < 2:
        raise InputError("need at least two items")
    vals = dm.values
    iu = np.triu_indices(dm.n, k=1)
    pair = vals[iu]
    r_max = float(pair.max())
    positive = pair[pair > 0]
    if positive.size == 0:
        raise DegenerateInputError("degenerate cloud: all pairwise distances are zero")
    r_min = float(positive.min())
    cap = DEFAULT_MAX_STEPS if max_steps is None else int(max_steps)
    if cap < 1:
        raise InputError("max_steps must be >= 1")
    m = min(math.floor(r_max / r_min), cap)
    m = max(m, 1)
    h = r_max / m
    values = h * np.arange(m + 1, dtype=np.float64)
    values[-1] = r_max
    return FiltrationGrid(r_max=r_max, r_min=r_min, step_count=m, step=h, values=values)


def exact_filtration(dm: DistanceMatrix) -> ExactFiltration:
    """Filtration values: 0 followed by every distinct positive distance."""
    if dm.n < 2:
        raise InputError("need at least two items")
    iu = np.triu_indices(dm.n, k=1)
    distinct = np.unique(dm.values[iu])
    distinct = distinct[distinct > 0]
    if distinct.size == 0:
        raise DegenerateInputError("degenerate cloud: all pairwise distances are zero")
    return ExactFiltration(np.concatenate(([0.0], distinct)))


def point_link_matrix(dm: DistanceMatrix, r: float, strict: bool = False) -> np.ndarray:
    """Boolean matrix of item pairs linked at scale ``r`` (false diagonal)."""
    if r < 0:
        raise InputError("scale must be nonnegative")
    linked = dm.values < r if strict else dm.values <= r
    np.fill_diagonal(linked, False)
    return linked


def cluster_link_matrix(
    partition: Partition, dm: DistanceMatrix, r: float, strict: bool = False
) -> np.ndarray:
    """Boolean matrix of cluster pairs with some cross-pair linked at scale ``r``.

    Equivalently: the single-linkage distance between the two clusters is
    within the scale.
    """
    if partition.member_count() != dm.n:
        raise InputError("partition does not cover the distance matrix items")
    k = len(partition.clusters)
    index_arrays = [np.fromiter(c, dtype=np.intp) for c in partition.clusters]
    links = np.zeros((k, k), dtype=bool)
    for a in range(k):
        for b in range(a + 1, k):
            cross = dm.values[np.ix_(index_arrays[a], index_arrays[b])]
            mind = cross.min()
            linked = mind < r if strict else mind <= r
            links[a, b] = links[b, a] = linked
    return links


def merge_step(partition: Partition, links: np.ndarray) -> Partition:
    """Fuse the connected components of the cluster-link graph.

    Starting from the first cluster, linked unvisited clusters are absorbed
    recursively until none remain, then the next unvisited cluster seeds a
    new component; cluster representatives stay the smallest member index.
    """
    k = len(partition.clusters)
    links = np.asarray(links, dtype=bool)
    if links.shape != (k, k):
        raise InputError("link matrix shape does not match the cluster count")
    seen = [False] * k
    out: list[tuple[int, ...]] = []
    for start in range(k):
        if seen[start]:
            continue
        seen[start] = True
        stack = [start]
        component = [start]
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(links[u]):
                v = int(v)
                if not seen[v]:
                    seen[v] = True
                    stack.append(v)
                    component.append(v)
        members: list[int] = []
        for c in component:
            members.extend(partition.clusters[c])
        out.append(tuple(sorted(members)))
    out.sort(key=lambda c: c[0])
    return Partition(level=partition.level, clusters=tuple(out))


class _MemberForest:
    """Union-find that tracks sorted member lists and min-index representatives."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.members: dict[int, list[int]] = {i: [i] for i in range(n)}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if ra > rb:
            ra, rb = rb, ra
        self.parent[rb] = ra
        small, large = self.members.pop(rb), self.members[ra]
        large.extend(small)
        return ra

    def clusters(self) -> tuple[tuple[int, ...], ...]:
        roots = sorted(self.members)
        return tuple(tuple(sorted(self.members[r])) for r in roots)


def _validate_compatible_values(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1 or values.shape[0] < 1:
        raise InputError("filtration values must be a nonempty 1-D array")
    if values[0] != 0.0:
        raise InputError("filtration must start at 0")
    if np.any(np.diff(values) <= 0):
        raise InputError("filtration values must be strictly increasing")
    return values


def run_htc(
    dm: DistanceMatrix,
    grid: FiltrationGrid | ExactFiltration | np.ndarray | None = None,
    *,
    strict: bool = False,
) -> ClusterHierarchy:
    """Cluster a distance matrix across all filtration levels.

    Parameters
    ----------
    dm : DistanceMatrix
    grid : FiltrationGrid or ExactFiltration, optional
        Defaults to :func:`build_filtration_grid`. A bare increasing value
        array starting at 0 is also accepted.
    strict : bool
        Link pairs with ``d < r`` instead of ``d <= r``. Under the strict
        convention pairs at exactly the diameter never link, so the final
        level can retain more than one cluster.

    Returns
    -------
    ClusterHierarchy
        One partition per level up to (and including) the first level with
        a single cluster, plus every merge event. Coincident items (distance
        zero) already share a cluster at level 0 under the default
        convention; that initial coalescence is not recorded as a merge.
    """
    if grid is None:
        grid = build_filtration_grid(dm)
    if isinstance(grid, (FiltrationGrid, ExactFiltration)):
        values = grid.values
    else:
        values = _validate_compatible_values(grid)
        grid = ExactFiltration(values)
    n = dm.n
    if n < 1:
        raise InputError("empty distance matrix")

    iu, ju = np.triu_indices(n, k=1)
    w = dm.values[iu, ju]
    order = np.argsort(w, kind="stable")
    union_level, union_i, union_j, evals, emitted = accel.threshold_sweep(
        iu[order].astype(np.int64),
        ju[order].astype(np.int64),
        w[order],
        np.asarray(values, dtype=np.float64),
        n,
        strict,
    )

    forest = _MemberForest(n)
    levels: list[Partition] = []
    merges: list[MergeEvent] = []
    pos = 0
    nu = len(union_level)
    current: tuple[tuple[int, ...], ...] | None = None
    for m in range(emitted):
        end = pos
        while end < nu and union_level[end] == m:
            end += 1
        if end == pos:
            if current is None:
                current = forest.clusters()
        else:
            # group this level's component-joining edges by the clusters they
            # touch at the start of the level, one merge event per group
            groups: dict[int, set[int]] = {}
            group_of: dict[int, int] = {}
            for t in range(pos, end):
                a = forest.find(int(union_i[t]))
                b = forest.find(int(union_j[t]))
                ga = group_of.get(a)
                gb = group_of.get(b)
                if ga is None and gb is None:
                    gid = min(a, b)
                    groups[gid] = {a, b}
                    group_of[a] = group_of[b] = gid
                elif ga is None:
                    groups[gb].add(a)
                    group_of[a] = gb
                elif gb is None:
                    groups[ga].add(b)
                    group_of[b] = ga
                elif ga != gb:
                    groups[ga] |= groups.pop(gb)
                    for r in groups[ga]:
                        group_of[r] = ga
            if m > 0:
                for reps in sorted(groups.values(), key=min):
                    absorbed = tuple(sorted(reps))
                    merges.append(
                        MergeEvent(level=float(values[m]), absorbed=absorbed, result=min(absorbed))
                    )
            for t in range(pos, end):
                forest.union(int(union_i[t]), int(union_j[t]))
            current = forest.clusters()
            pos = end
        levels.append(Partition(level=float(values[m]), clusters=current))
    return ClusterHierarchy(
        grid=grid,
        levels=tuple(levels),
        merges=tuple(merges),
        n_items=n,
        strict_links=strict,
        predicate_evaluations_per_level=tuple(int(c) for c in evals),
    )


def betti0(h: ClusterHierarchy, r: float) -> int:
    """Cluster count at the largest filtration value not exceeding ``r``."""
    values = h.grid.values
    if r < 0 or r > values[-1]:
        raise InputError("scale outside the filtration range")
    idx = int(np.searchsorted(values, r, side="right")) - 1
    idx = min(idx, len(h.levels) - 1)
    return len(h.levels[idx].clusters)


def barcode(h: ClusterHierarchy) -> Barcode:
    """Component lifetimes under the elder rule.

    Each item starts as its own component at scale 0. When components fuse,
    the one with the smallest member index survives; every other fused
    component dies at that level and its bar is attributed to its
    representative. Components alive at the end get an infinite death, so
    the number of bars alive at any scale equals the cluster count there.
    """
    deaths = {}
    for cluster in h.levels[0].clusters:
        # items coincident with an elder at scale 0 never own a component
        for item in cluster[1:]:
            deaths[item] = 0.0
    for ev in h.merges:
        for rep in ev.absorbed:
            if rep != ev.result:
                deaths[rep] = ev.level
    bars = tuple(
        Bar(birth=0.0, death=deaths.get(item, math.inf), representative=item)
        for item in range(h.n_items)
    )
    return Barcode(intervals=bars)


def outlier_ranking(h: ClusterHierarchy) -> list[tuple[tuple[int, ...], float]]:
    """Clusters ranked by how late they join a group at least their size.

    At every merge event, each fused cluster is recorded unless it is the
    unique largest participant (the dominant cluster absorbs the others and
    is not itself an outlier at that level). Entries are ordered by
    descending merge level, ties by ascending representative, so the most
    persistently isolated items and groups come first.
    """
    entries: list[tuple[tuple[int, ...], float]] = []
    member_lists: dict[int, tuple[int, ...]] = {
        c[0]: c for c in h.levels[0].clusters
    }
    for ev in h.merges:
        parts = [member_lists[rep] for rep in ev.absorbed]
        sizes = [len(p) for p in parts]
        biggest = max(sizes)
        dominant = sizes.count(biggest) == 1
        for part, size in zip(parts, sizes):
            if dominant and size == biggest:
                continue
            entries.append((part, ev.level))
        merged = tuple(sorted(x for p in parts for x in p))
        for rep in ev.absorbed:
            member_lists.pop(rep, None)
        member_lists[merged[0]] = merged
    entries.sort(key=lambda e: (-e[1], e[0][0]))
    return entries


def export_dendrogram(h: ClusterHierarchy) -> Dendrogram:
    """Merge tree whose node heights are the hierarchy's merge levels.

    Clusters already coincident at level 0 appear as height-0 nodes. Raises
    if the hierarchy never reaches a single cluster (possible under the
    strict link convention or a truncated filtration).
    """
    if h.final_cluster_count != 1:
        raise DegenerateInputError("hierarchy does not end in a single cluster")
    n = h.n_items
    node_of: dict[int, int] = {i: i for i in range(n)}
    merges: list[DendrogramMerge] = []
    next_id = n
    for cluster in h.levels[0].clusters:
        if len(cluster) > 1:
            merges.append(
                DendrogramMerge(height=0.0, children=tuple(node_of[i] for i in cluster))
            )
            for i in cluster:
                node_of[i] = next_id
            next_id += 1
    rep_node: dict[int, int] = {c[0]: node_of[c[0]] for c in h.levels[0].clusters}
    for ev in h.merges:
        children = tuple(rep_node.pop(rep) for rep in ev.absorbed)
        merges.append(DendrogramMerge(height=ev.level, children=children))
        rep_node[ev.result] = next_id
        next_id += 1
    return Dendrogram(leaf_count=n, merges=tuple(merges))
