import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jmdm import (
    LabeledDataset,
    bhattacharyya,
    compute_class_stats,
    compute_jm_profiles,
    fisher_scores,
    jm_from_b,
    mean_scores,
)
from jmdm.separability import VARIANCE_FLOOR, ClassStats, jm_matrices, write_profiles_csv


def scalar_b(mu1, v1, mu2, v2):
    """Independent scalar evaluation, written straight from the formula."""
    return (1 / 8) * (mu1 - mu2) ** 2 * 2 / (v1 + v2) + 0.5 * math.log((v1 + v2) / (2 * math.sqrt(v1) * math.sqrt(v2)))


def scalar_jm(b):
    return 2 * (1 - math.exp(-b))


def _stats(means, variances, counts=None):
    means = np.atleast_2d(np.asarray(means, dtype=float))
    variances = np.atleast_2d(np.asarray(variances, dtype=float))
    if counts is None:
        counts = np.full(means.shape[1], 10)
    return ClassStats(means=means, variances=variances, counts=np.asarray(counts))


class TestClassStats:
    def test_zero_spread_hits_floor(self):
        ds = LabeledDataset.from_arrays([0.0, 0.0, 2.0, 2.0], list("aabb"))
        s = compute_class_stats(ds)
        np.testing.assert_array_equal(s.means, [[0.0, 2.0]])
        np.testing.assert_array_equal(s.variances, [[VARIANCE_FLOOR, VARIANCE_FLOOR]])

    def test_population_variance(self):
        ds = LabeledDataset.from_arrays([0.0, 2.0, 1.0, 3.0], list("aabb"))
        s = compute_class_stats(ds)
        np.testing.assert_array_equal(s.means, [[1.0, 2.0]])
        np.testing.assert_array_equal(s.variances, [[1.0, 1.0]])
        np.testing.assert_array_equal(s.counts, [2, 2])

    def test_singleton_class(self):
        ds = LabeledDataset.from_arrays([0.0, 1.0, 5.0], list("aab"))
        assert compute_class_stats(ds).variances[0, 1] == VARIANCE_FLOOR

    def test_rows_subset_and_missing_class(self):
        ds = LabeledDataset.from_arrays([0.0, 2.0, 1.0, 3.0, 9.0], list("aabbc"))
        s = compute_class_stats(ds, [0, 1, 2, 3, 4])
        assert s.counts.sum() == 5
        with pytest.raises(ValueError, match="no rows"):
            compute_class_stats(ds, [0, 1, 2, 3])


class TestBhattacharyya:
    def test_identical(self):
        assert bhattacharyya(0, 1, 0, 1) == 0.0

    def test_mean_gap_only(self):
        assert bhattacharyya(0, 1, 2, 1) == pytest.approx(0.5, abs=1e-15)

    def test_variance_ratio_only(self):
        assert bhattacharyya(0, 1, 0, 4) == pytest.approx(0.5 * math.log(5 / 4), abs=1e-15)
        assert 0.5 * math.log(5 / 4) == pytest.approx(0.111572, abs=1e-6)

    def test_rejects_nonpositive_variance(self):
        with pytest.raises(ValueError):
            bhattacharyya(0, 0.0, 1, 1)

    @settings(max_examples=200)
    @given(
        mu1=st.floats(-50, 50),
        mu2=st.floats(-50, 50),
        v1=st.floats(1e-6, 1e3),
        v2=st.floats(1e-6, 1e3),
    )
    def test_matches_scalar_oracle_and_is_symmetric(self, mu1, mu2, v1, v2):
        b = bhattacharyya(mu1, v1, mu2, v2)
        assert b >= 0.0
        assert b == pytest.approx(scalar_b(mu1, v1, mu2, v2), rel=1e-9, abs=1e-12)
        assert b == bhattacharyya(mu2, v2, mu1, v1)


class TestJmFromB:
    def test_values(self):
        assert jm_from_b(0.0) == 0.0
        assert jm_from_b(0.5) == pytest.approx(2 * (1 - math.exp(-0.5)), abs=1e-15)
        assert jm_from_b(0.5) == pytest.approx(0.786939, abs=1e-6)
        assert abs(jm_from_b(50.0) - 2.0) < 1e-20

    def test_monotone(self):
        b = np.linspace(0, 30, 1000)
        assert np.all(np.diff(jm_from_b(b)) > 0)


class TestProfiles:
    def test_feature_identical_across_classes(self):
        p = compute_jm_profiles(_stats([[1.0, 1.0, 1.0]], [[2.0, 2.0, 2.0]]))[0]
        np.testing.assert_array_equal(p.matrix, np.zeros((3, 3)))
        assert p.mean_score == 0.0

    def test_two_classes(self):
        p = compute_jm_profiles(_stats([[0.0, 2.0]], [[1.0, 1.0]]))[0]
        jm = 2 * (1 - math.exp(-0.5))
        np.testing.assert_allclose(p.matrix, [[0, jm], [jm, 0]], atol=1e-15)
        assert p.mean_score == pytest.approx(jm / 2, abs=1e-15)
        assert p.mean_score == pytest.approx(0.393469, abs=1e-6)
        np.testing.assert_array_equal(p.flat, p.matrix.reshape(-1))

    def test_one_far_class(self):
        p = compute_jm_profiles(_stats([[0.0, 0.0, 5.0]], [[1.0, 1.0, 1.0]]))[0]
        off = p.matrix[~np.eye(3, dtype=bool)]
        assert np.count_nonzero(off == 0.0) == 2  # the (0,1) pair, both halves
        assert p.matrix[0, 1] == 0.0 and p.matrix[1, 0] == 0.0

    def test_brute_force_equivalence(self, rng):
        X = rng.normal(size=(60, 5)) * rng.uniform(0.5, 3, size=5)
        y = rng.integers(0, 3, size=60)
        y[:3] = [0, 1, 2]
        ds = LabeledDataset.from_arrays(X, y)
        stats = compute_class_stats(ds)
        profiles = compute_jm_profiles(stats)
        for i, p in enumerate(profiles):
            for c in range(3):
                for d in range(3):
                    col = X[:, i]
                    a, b = col[y == c], col[y == d]
                    want = scalar_jm(scalar_b(a.mean(), a.var(), b.mean(), b.var()))
                    assert p.matrix[c, d] == pytest.approx(want, abs=1e-12)
            assert p.mean_score == pytest.approx(p.matrix.mean(), abs=1e-15)

    def test_structure_on_random_stats(self, rng):
        stats = _stats(rng.normal(size=(40, 6)), rng.uniform(0.1, 4, size=(40, 6)))
        jm = jm_matrices(stats)
        assert np.array_equal(jm, jm.transpose(0, 2, 1))
        assert np.all(jm[:, np.arange(6), np.arange(6)] == 0.0)
        assert np.all((jm >= 0) & (jm < 2))

    def test_saturated_entries_stay_bounded(self):
        # floored variances and a unit gap: B ~ 1e11, JM rounds to exactly 2.0
        p = compute_jm_profiles(_stats([[0.0, 1.0]], [[VARIANCE_FLOOR, VARIANCE_FLOOR]]))[0]
        assert p.matrix[0, 1] == 2.0 and np.all(p.matrix <= 2.0)

    @settings(max_examples=50, deadline=None)
    @given(a=st.floats(0.01, 100) | st.floats(-100, -0.01), b=st.floats(-100, 100), seed=st.integers(0, 2**32 - 1))
    def test_affine_invariance(self, a, b, seed):
        r = np.random.default_rng(seed)
        X = r.normal(size=(30, 2))
        y = np.repeat([0, 1, 2], 10)
        base = compute_jm_profiles(compute_class_stats(LabeledDataset.from_arrays(X, y)))
        X2 = X.copy()
        X2[:, 1] = a * X2[:, 1] + b
        moved = compute_jm_profiles(compute_class_stats(LabeledDataset.from_arrays(X2, y)))
        np.testing.assert_allclose(moved[1].matrix, base[1].matrix, atol=1e-9)
        np.testing.assert_array_equal(moved[0].matrix, base[0].matrix)

    def test_monotone_in_mean_gap(self):
        gaps = np.linspace(0, 6, 50)
        stats = _stats(np.column_stack([np.zeros_like(gaps), gaps]), np.full((50, 2), 1.3))
        jm01 = jm_matrices(stats)[:, 0, 1]
        assert np.all(np.diff(jm01) > 0)

    def test_csv_export(self):
        profiles = compute_jm_profiles(_stats([[0.0, 2.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 1.0]]))
        buf = io.StringIO()
        write_profiles_csv(profiles, buf)
        rows = list(csv.reader(io.StringIO(buf.getvalue())))
        assert rows[0] == ["feature_index", "mean_score", "jm_0_0", "jm_0_1", "jm_1_0", "jm_1_1"]
        assert len(rows) == 3
        assert float(rows[1][1]) == profiles[0].mean_score
        assert [float(v) for v in rows[1][2:]] == profiles[0].flat.tolist()


class TestFisher:
    def test_constant_feature(self):
        ds = LabeledDataset.from_arrays([[4.0, 0.0], [4.0, 1.0], [4.0, 2.0], [4.0, 3.0]], list("aabb"))
        assert fisher_scores(compute_class_stats(ds))[0] == 0.0

    def test_hand_value(self):
        pat = np.tile([0.1, -0.1], 5)
        ds = LabeledDataset.from_arrays(np.concatenate([pat, 1.0 + pat]), [0] * 10 + [1] * 10)
        stats = compute_class_stats(ds)
        np.testing.assert_allclose(stats.variances, 0.01, rtol=1e-12)
        # (10*0.25 + 10*0.25) / (10*0.01 + 10*0.01)
        assert fisher_scores(stats)[0] == pytest.approx(25.0, rel=1e-12)

    def test_scale_invariant(self, rng):
        X = rng.normal(size=(40, 3))
        y = np.arange(40) % 4
        s = fisher_scores(compute_class_stats(LabeledDataset.from_arrays(X, y)))
        s2 = fisher_scores(compute_class_stats(LabeledDataset.from_arrays(X * [3.0, 0.2, 1e3], y)))
        np.testing.assert_allclose(s2, s, rtol=1e-10)


def test_mean_scores_vector(comp_ds):
    profiles = compute_jm_profiles(compute_class_stats(comp_ds))
    m = mean_scores(profiles)
    assert m.shape == (8,)
    # group A beats group B and the gap shrinks with the index inside each group
    assert np.all(np.diff(m) < 0)
