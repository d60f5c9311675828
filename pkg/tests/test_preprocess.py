import numpy as np
import pytest

from htcluster import (
    DEFAULT_RANK_SCHEDULE,
    InputError,
    LineDefect,
    NormalizationReference,
    generate_image_series,
    inject_line,
    svd_compress,
    zscore_normalize,
)


class TestZscoreNormalize:
    def test_reference_means_map_to_zero(self):
        ref = NormalizationReference(means=[2.0, -1.0], stds=[1.0, 4.0])
        out = zscore_normalize([[2.0, -1.0], [2.0, -1.0]], ref)
        assert not out.any()

    def test_single_column_hand_value(self):
        ref = NormalizationReference(means=[2.0], stds=[1.0])
        out = zscore_normalize([[5.0]], ref, factor=3.0)
        assert out[0, 0] == 1.0  # (5 - 2) / (3 * 1)

    def test_self_normalized_cohort_stats(self, rng):
        cohort = rng.random((40, 6)) * 5
        ref = NormalizationReference.from_samples(cohort)
        out = zscore_normalize(cohort, ref, factor=3.0)
        assert np.abs(out.mean(axis=0)).max() < 1e-12
        assert np.abs(out.std(axis=0) - 1.0 / 3.0).max() < 1e-12

    def test_constant_columns_dropped_with_warning(self, rng):
        cohort = rng.random((10, 3))
        cohort[:, 1] = 7.0
        ref = NormalizationReference.from_samples(cohort)
        assert list(ref.constant_features) == [1]
        with pytest.warns(UserWarning, match="constant"):
            out = zscore_normalize(cohort, ref)
        assert out.shape == (10, 2)

    def test_dimension_mismatch(self):
        ref = NormalizationReference(means=[0.0, 0.0], stds=[1.0, 1.0])
        with pytest.raises(InputError):
            zscore_normalize([[1.0]], ref)

    def test_shift_equivariance(self, rng):
        data = rng.random((12, 4))
        ref = NormalizationReference.from_samples(rng.random((30, 4)) + 0.5)
        shifted = data.copy()
        shifted[:, 2] += 5.0
        base = zscore_normalize(data, ref, factor=2.0)
        moved = zscore_normalize(shifted, ref, factor=2.0)
        expected = base[:, 2] + 5.0 / (2.0 * ref.stds[2])
        assert np.allclose(moved[:, 2], expected, atol=1e-12)


class TestSvdCompress:
    def test_full_rank_reconstructs(self, rng):
        m = rng.random((7, 5))
        out = svd_compress(m, 5)
        assert np.linalg.norm(out - m) <= 1e-9 * np.linalg.norm(m)

    def test_rank_one_exact(self, rng):
        m = np.outer(rng.random(6), rng.random(4))
        out = svd_compress(m, 1)
        assert np.linalg.norm(out - m) <= 1e-12 * np.linalg.norm(m)

    def test_error_matches_eigenvalue_oracle(self, rng):
        m = rng.random((8, 6))
        k = 3
        out = svd_compress(m, k)
        err = np.linalg.norm(m - out)
        # independent spectrum: eigenvalues of the Gram matrix
        eigvals = np.linalg.eigvalsh(m.T @ m)[::-1]
        expected = np.sqrt(max(eigvals[k:].sum(), 0.0))
        assert err == pytest.approx(expected, abs=1e-9)

    def test_error_monotone_in_k(self, rng):
        m = rng.random((10, 9))
        errs = [np.linalg.norm(m - svd_compress(m, k)) for k in range(1, 10)]
        assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))

    def test_beats_random_rank_k(self, rng):
        m = rng.random((6, 5))
        k = 2
        best = np.linalg.norm(m - svd_compress(m, k))
        for _ in range(100):
            a = rng.normal(size=(6, k))
            b = rng.normal(size=(k, 5))
            assert np.linalg.norm(m - a @ b) >= best - 1e-12

    def test_k_out_of_range(self, rng):
        m = rng.random((4, 4))
        with pytest.raises(InputError):
            svd_compress(m, 0)
        with pytest.raises(InputError):
            svd_compress(m, 5)

    def test_color_input_averaged(self, rng):
        rgb = rng.random((5, 5, 3))
        gray = rgb.mean(axis=2)
        assert np.allclose(svd_compress(rgb, 5), gray, atol=1e-12)


class TestLineDefect:
    def test_locality(self, rng):
        img = rng.random((10, 8))
        out = inject_line(img, LineDefect("row", 3, thickness=2, intensity=0.0))
        assert not out[3:5, :].any()
        mask = np.ones(10, dtype=bool)
        mask[3:5] = False
        assert np.array_equal(out[mask], img[mask])

    def test_column_orientation(self, rng):
        img = rng.random((6, 6))
        out = inject_line(img, LineDefect("col", 0, intensity=9.0))
        assert (out[:, 0] == 9.0).all()

    def test_invalid_placement(self, rng):
        img = rng.random((4, 4))
        with pytest.raises(InputError):
            inject_line(img, LineDefect("row", 4))
        with pytest.raises(InputError):
            inject_line(img, LineDefect("col", 3, thickness=2))


class TestGenerateImageSeries:
    def test_default_schedule_shape(self):
        assert DEFAULT_RANK_SCHEDULE == tuple(range(10, 151, 5))
        assert len(DEFAULT_RANK_SCHEDULE) == 29

    def test_default_series_with_defect_has_32_images(self, rng):
        img = rng.random((160, 160))
        series = generate_image_series(img, defect=LineDefect("row", 80))
        assert len(series) == 32

    def test_defect_targets_order(self, rng):
        img = rng.random((40, 40))
        series = generate_image_series(
            img, schedule=(5, 10), defect=LineDefect("row", 20), defect_targets=(-1, 0)
        )
        assert len(series) == 5
        # second-to-last: defect over the last compressed image
        assert np.array_equal(series[3][:20], series[2][:20])
        assert not series[3][20].any()
        # last: defect over the original
        assert np.array_equal(series[4][:20], img[:20])

    def test_original_first_compression_follows_schedule(self, rng):
        img = rng.random((30, 30))
        series = generate_image_series(img, schedule=(2, 4))
        assert np.array_equal(series[0], img)
        assert np.allclose(series[1], svd_compress(img, 2))
        assert np.allclose(series[2], svd_compress(img, 4))

    def test_invalid_schedule_rank(self, rng):
        img = rng.random((8, 8))
        with pytest.raises(InputError):
            generate_image_series(img, schedule=(9,))

    def test_bad_defect_target(self, rng):
        img = rng.random((8, 8))
        with pytest.raises(InputError):
            generate_image_series(
                img, schedule=(2,), defect=LineDefect("row", 1), defect_targets=(5,)
            )
