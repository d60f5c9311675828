import math

import numpy as np
import pytest

from htcluster import (
    DegenerateInputError,
    DistanceMatrix,
    InputError,
    Partition,
    PointCloud,
    barcode,
    betti0,
    build_filtration_grid,
    cluster_link_matrix,
    euclidean_matrix,
    exact_filtration,
    export_dendrogram,
    merge_step,
    outlier_ranking,
    point_link_matrix,
    run_htc,
)
from htcluster.dendrogram import cophenetic_matrix

from conftest import random_cloud, threshold_components, minimax_matrix


def collinear013():
    return euclidean_matrix(PointCloud([[0.0], [1.0], [3.0]]))


def pair4():
    return DistanceMatrix([[0.0, 4.0], [4.0, 0.0]])


class TestFiltrationGrid:
    def test_single_pair_forces_all_fields(self):
        grid = build_filtration_grid(pair4())
        assert grid.r_max == 4.0
        assert grid.r_min == 4.0
        assert grid.step_count == 1
        assert grid.step == 4.0
        assert np.array_equal(grid.values, [0.0, 4.0])

    def test_collinear_points(self):
        grid = build_filtration_grid(collinear013())
        assert grid.r_max == 3.0
        assert grid.r_min == 1.0
        assert grid.step_count == 3
        assert np.array_equal(grid.values, [0.0, 1.0, 2.0, 3.0])

    def test_level_zero_is_all_singletons(self, rng):
        for _ in range(5):
            dm = euclidean_matrix(random_cloud(rng))
            h = run_htc(dm)
            assert h.grid.values[0] == 0.0
            assert h.levels[0].clusters == tuple((i,) for i in range(dm.n))

    def test_max_steps_cap(self):
        dm = euclidean_matrix(PointCloud([[0.0], [0.001], [1.0]]))
        grid = build_filtration_grid(dm, max_steps=10)
        assert grid.step_count == 10
        assert grid.values[-1] == grid.r_max

    def test_all_zero_matrix_degenerate(self):
        dm = DistanceMatrix(np.zeros((3, 3)))
        with pytest.raises(DegenerateInputError):
            build_filtration_grid(dm)

    def test_single_item_rejected(self):
        with pytest.raises(InputError):
            build_filtration_grid(DistanceMatrix([[0.0]]))


class TestPointLinkMatrix:
    def test_r_zero_distinct_points(self):
        links = point_link_matrix(collinear013(), 0.0)
        assert not links.any()

    def test_r_max_links_everything(self):
        dm = collinear013()
        links = point_link_matrix(dm, 3.0)
        expected = ~np.eye(3, dtype=bool)
        assert np.array_equal(links, expected)

    def test_partial_threshold(self):
        links = point_link_matrix(collinear013(), 1.0)
        assert links[0, 1] and links[1, 0]
        assert not links[0, 2] and not links[1, 2]
        assert not links.diagonal().any()

    def test_negative_scale_rejected(self):
        with pytest.raises(InputError):
            point_link_matrix(collinear013(), -0.5)

    def test_strict_excludes_boundary(self):
        links = point_link_matrix(collinear013(), 1.0, strict=True)
        assert not links.any()


class TestClusterLinkMatrix:
    def test_singletons_match_point_links(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=12))
        part = Partition(level=0.0, clusters=tuple((i,) for i in range(12)))
        r = float(np.median(dm.values))
        assert np.array_equal(cluster_link_matrix(part, dm, r), point_link_matrix(dm, r))

    def test_min_cross_pair_decides(self):
        vals = np.zeros((3, 3))
        vals[0, 1] = vals[1, 0] = 1.0
        vals[1, 2] = vals[2, 1] = 2.0
        vals[0, 2] = vals[2, 0] = 5.0
        dm = DistanceMatrix(vals)
        part = Partition(level=0.0, clusters=((0, 1), (2,)))
        links = cluster_link_matrix(part, dm, 2.0)
        assert links[0, 1] and links[1, 0]

    def test_r_zero_all_false(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=6))
        part = Partition(level=0.0, clusters=((0, 1), (2, 3), (4, 5)))
        assert not cluster_link_matrix(part, dm, 0.0).any()


class TestMergeStep:
    def setup_method(self):
        self.part = Partition(level=1.0, clusters=((0,), (1,), (2,)))

    def test_no_links_no_change(self):
        out = merge_step(self.part, np.zeros((3, 3), dtype=bool))
        assert out.clusters == self.part.clusters

    def test_transitive_closure(self):
        links = np.zeros((3, 3), dtype=bool)
        links[0, 1] = links[1, 0] = True
        links[1, 2] = links[2, 1] = True
        out = merge_step(self.part, links)
        assert out.clusters == ((0, 1, 2),)

    def test_all_links_single_cluster(self):
        links = ~np.eye(3, dtype=bool)
        out = merge_step(self.part, links)
        assert out.clusters == ((0, 1, 2),)

    def test_membership_unions(self):
        part = Partition(level=2.0, clusters=((0, 3), (1,), (2, 4)))
        links = np.zeros((3, 3), dtype=bool)
        links[0, 2] = links[2, 0] = True
        out = merge_step(part, links)
        assert out.clusters == ((0, 2, 3, 4), (1,))


class TestRunHtc:
    def test_two_points(self):
        h = run_htc(pair4())
        assert [p.clusters for p in h.levels] == [((0,), (1,)), ((0, 1),)]
        assert len(h.merges) == 1
        assert h.merges[0].level == 4.0
        assert h.merges[0].absorbed == (0, 1)

    def test_collinear_levels(self):
        h = run_htc(collinear013())
        assert h.levels[1].clusters == ((0, 1), (2,))
        assert h.levels[2].clusters == ((0, 1, 2),)

    def test_final_level_single_cluster(self, rng):
        for _ in range(5):
            h = run_htc(euclidean_matrix(random_cloud(rng)))
            assert h.final_cluster_count == 1

    def test_levels_match_threshold_components(self, rng):
        for _ in range(10):
            dm = euclidean_matrix(random_cloud(rng, n=int(rng.integers(5, 25))))
            h = run_htc(dm)
            for level in h.levels:
                assert level.clusters == threshold_components(dm.values, level.level)

    def test_strict_convention(self, rng):
        dm = pair4()
        h = run_htc(dm, strict=True)
        # the only pair sits exactly at the diameter: never linked strictly
        assert h.final_cluster_count == 2
        assert len(h.levels) == 2
        for level in h.levels:
            assert level.clusters == threshold_components(dm.values, level.level, strict=True)

    def test_coincident_points_cocluster_at_zero(self):
        dm = euclidean_matrix(PointCloud([[0.0], [0.0], [1.0]]))
        h = run_htc(dm)
        assert h.levels[0].clusters == ((0, 1), (2,))
        assert all(ev.level > 0 for ev in h.merges)

    def test_coarsening_between_levels(self, rng):
        h = run_htc(euclidean_matrix(random_cloud(rng, n=30)))
        for prev, nxt in zip(h.levels, h.levels[1:]):
            prev_sets = [set(c) for c in prev.clusters]
            nxt_sets = [set(c) for c in nxt.clusters]
            for c in prev_sets:
                assert sum(c <= d for d in nxt_sets) == 1

    def test_cluster_counts_nonincreasing(self, rng):
        h = run_htc(euclidean_matrix(random_cloud(rng, n=40)))
        counts = h.cluster_counts()
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_early_stop_no_trailing_levels(self, rng):
        h = run_htc(euclidean_matrix(random_cloud(rng, n=25)))
        assert h.final_cluster_count == 1
        assert all(len(p.clusters) > 1 for p in h.levels[:-1])

    def test_permutation_equivariance(self, rng):
        pts = rng.random((15, 3))
        perm = rng.permutation(15)
        h1 = run_htc(euclidean_matrix(PointCloud(pts)))
        h2 = run_htc(euclidean_matrix(PointCloud(pts[perm])))
        # map h2's indices back through the permutation and compare per level
        assert len(h1.levels) == len(h2.levels)
        for l1, l2 in zip(h1.levels, h2.levels):
            mapped = tuple(
                sorted(tuple(sorted(int(perm[i]) for i in c)) for c in l2.clusters)
            )
            assert mapped == tuple(sorted(l1.clusters))

    def test_scale_equivariance(self, rng):
        pts = rng.random((12, 2))
        dm = euclidean_matrix(PointCloud(pts))
        c = 4.0  # powers of two scale float distances exactly
        scaled = DistanceMatrix(dm.values * c)
        h1 = run_htc(dm)
        h2 = run_htc(scaled)
        g1, g2 = h1.grid, h2.grid
        assert g2.r_max == c * g1.r_max and g2.r_min == c * g1.r_min
        assert g2.step_count == g1.step_count
        assert [p.clusters for p in h1.levels] == [p.clusters for p in h2.levels]
        assert [ev.level for ev in h2.merges] == [c * ev.level for ev in h1.merges]

    def test_complexity_guard(self, rng):
        for _ in range(5):
            dm = euclidean_matrix(random_cloud(rng, n=30))
            h = run_htc(dm)
            m = h.grid.step_count
            assert h.predicate_evaluations <= m * dm.n**2

    def test_custom_value_array(self):
        dm = collinear013()
        h = run_htc(dm, np.array([0.0, 0.5, 2.5, 3.0]))
        assert [len(p.clusters) for p in h.levels] == [3, 3, 1]

    def test_bad_value_array_rejected(self):
        dm = collinear013()
        with pytest.raises(InputError):
            run_htc(dm, np.array([0.5, 1.0]))
        with pytest.raises(InputError):
            run_htc(dm, np.array([0.0, 1.0, 1.0]))


class TestExactMode:
    def test_values_are_distinct_distances(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=10))
        filt = exact_filtration(dm)
        iu = np.triu_indices(10, 1)
        expected = np.unique(dm.values[iu])
        assert np.array_equal(filt.values[1:], expected[expected > 0])

    def test_merge_levels_are_exact_distances(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=15))
        h = run_htc(dm, exact_filtration(dm))
        dists = set(dm.values[np.triu_indices(15, 1)])
        assert all(ev.level in dists for ev in h.merges)

    def test_minimax_correspondence(self, rng):
        # first co-clustering level equals the minimax path distance exactly
        dm = euclidean_matrix(random_cloud(rng, n=12))
        h = run_htc(dm, exact_filtration(dm))
        mm = minimax_matrix(dm.values)
        first = np.full((12, 12), np.inf)
        for level in h.levels:
            for cluster in level.clusters:
                for a in cluster:
                    for b in cluster:
                        if a < b and not np.isfinite(first[a, b]):
                            first[a, b] = first[b, a] = level.level
        np.fill_diagonal(first, 0.0)
        assert np.array_equal(first, mm)


class TestGridMinimaxCorrespondence:
    def test_cocluster_level_is_grid_ceiling_of_minimax(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=14))
        h = run_htc(dm)
        mm = minimax_matrix(dm.values)
        values = h.grid.values
        for a in range(14):
            for b in range(a + 1, 14):
                expected = values[np.searchsorted(values, mm[a, b], side="left")]
                got = None
                for level in h.levels:
                    if any(a in c and b in c for c in level.clusters):
                        got = level.level
                        break
                assert got == expected


class TestBetti0:
    def test_endpoints(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=17))
        h = run_htc(dm)
        assert betti0(h, 0.0) == 17
        assert betti0(h, h.grid.r_max) == 1

    def test_between_grid_values(self):
        h = run_htc(collinear013())
        assert betti0(h, 1.5) == 2

    def test_out_of_range(self):
        h = run_htc(collinear013())
        with pytest.raises(InputError):
            betti0(h, -0.1)
        with pytest.raises(InputError):
            betti0(h, 3.5)


class TestBarcode:
    def test_two_point_bars(self):
        b = barcode(run_htc(pair4()))
        assert [(bar.birth, bar.death, bar.representative) for bar in b.intervals] == [
            (0.0, math.inf, 0),
            (0.0, 4.0, 1),
        ]

    def test_exactly_one_infinite_bar(self, rng):
        b = barcode(run_htc(euclidean_matrix(random_cloud(rng, n=20))))
        assert sum(1 for bar in b.intervals if math.isinf(bar.death)) == 1
        assert len(b.intervals) == 20

    def test_alive_counts_equal_betti(self, rng):
        h = run_htc(euclidean_matrix(random_cloud(rng, n=18)))
        b = barcode(h)
        for level in h.levels:
            assert b.alive_at(level.level) == len(level.clusters)


class TestOutlierRanking:
    def test_symmetric_pair_tiebreak(self):
        ranking = outlier_ranking(run_htc(pair4()))
        assert ranking == [((0,), 4.0), ((1,), 4.0)]

    def test_far_point_ranks_first(self):
        h = run_htc(collinear013())
        ranking = outlier_ranking(h)
        assert ranking[0] == ((2,), 2.0)

    def test_blob_plus_far_point(self, rng):
        blob = rng.random((10, 2)) * 0.1
        far = np.array([[50.0, 50.0]])
        pc = PointCloud(np.vstack([blob, far]))
        ranking = outlier_ranking(run_htc(euclidean_matrix(pc)))
        assert ranking[0][0] == (10,)

    def test_dominant_cluster_not_listed(self):
        h = run_htc(collinear013())
        # at level 2 the pair (0, 1) absorbs (2,): only the singleton listed
        top_level_entries = [e for e in outlier_ranking(h) if e[1] == 2.0]
        assert top_level_entries == [((2,), 2.0)]


class TestExportDendrogram:
    def test_two_points(self):
        dend = export_dendrogram(run_htc(pair4()))
        assert dend.leaf_count == 2
        assert len(dend.merges) == 1
        assert dend.merges[0].height == 4.0
        assert set(dend.merges[0].children) == {0, 1}

    def test_heights_nondecreasing_along_paths(self, rng):
        dend = export_dendrogram(run_htc(euclidean_matrix(random_cloud(rng, n=20))))
        heights = [m.height for m in dend.merges]
        assert heights == sorted(heights)

    def test_cophenetic_equals_first_cocluster_level(self, rng):
        dm = euclidean_matrix(random_cloud(rng, n=10))
        h = run_htc(dm)
        coph = cophenetic_matrix(export_dendrogram(h))
        for a in range(10):
            for b in range(a + 1, 10):
                first = next(
                    level.level
                    for level in h.levels
                    if any(a in c and b in c for c in level.clusters)
                )
                assert coph[a, b] == first

    def test_strict_unmerged_rejected(self):
        h = run_htc(pair4(), strict=True)
        with pytest.raises(DegenerateInputError):
            export_dendrogram(h)

    def test_multiway_merge_recorded_once(self):
        pts = PointCloud([[0.0], [1.0], [2.0]])
        h = run_htc(euclidean_matrix(pts))
        # both gaps equal 1: three singletons fuse at the first level
        assert len(h.merges) == 1
        assert h.merges[0].absorbed == (0, 1, 2)
        dend = export_dendrogram(h)
        assert len(dend.merges) == 1
        assert dend.merges[0].children == (0, 1, 2)
