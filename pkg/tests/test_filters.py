import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_threshold
from skf.errors import InvalidArgumentError
from skf.filters import (
    compute_w_statistics,
    knockoff_threshold,
    ms_ratio_curve,
    select_and_evaluate,
)

nonneg = st.floats(min_value=0, max_value=100, allow_nan=False)


class TestComputeWStatistics:
    def test_feature_wins(self):
        stats = compute_w_statistics([3.0], [1.0])
        assert stats.W[0] == 3.0
        assert stats.W_s[0] == 3.0

    def test_knockoff_wins(self):
        stats = compute_w_statistics([2.0], [5.0])
        assert stats.W[0] == -5.0
        assert stats.W_s[0] == -2.0

    def test_tie_gives_zero(self):
        stats = compute_w_statistics([4.0], [4.0])
        assert stats.W[0] == 0.0
        assert stats.W_s[0] == 0.0

    def test_rejects_negative(self):
        with pytest.raises(InvalidArgumentError):
            compute_w_statistics([-1.0], [0.0])
        with pytest.raises(InvalidArgumentError):
            compute_w_statistics([1.0], [-2.0])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(nonneg, nonneg), min_size=1, max_size=10))
    def test_sign_coupling_and_domination(self, pairs):
        z = np.array([a for a, _ in pairs])
        zt = np.array([b for _, b in pairs])
        stats = compute_w_statistics(z, zt)
        # sign coupling holds wherever Z > 0; Z = 0 forces W_s = 0 by definition
        # (pipeline statistics always have Z = 0 => Z_tilde = 0 => W = 0)
        pos = z > 0
        np.testing.assert_array_equal(np.sign(stats.W_s[pos]), np.sign(stats.W[pos]))
        np.testing.assert_array_equal(stats.W_s[~pos], np.zeros(np.sum(~pos)))
        assert np.all(np.abs(stats.W_s) <= np.abs(stats.W) + 1e-12)
        nonzero = stats.W != 0.0
        np.testing.assert_allclose(np.abs(stats.W_s[nonzero]), z[nonzero])


class TestKnockoffThreshold:
    def test_worked_example(self):
        w = [3.0, 2.0, -1.0, 1.0, -4.0]
        # t=1: 2/3 > 0.5; t=2: 1/2 <= 0.5
        assert knockoff_threshold(w, 0.5, plus=False) == 2.0

    def test_worked_example_plus(self):
        w = [3.0, 2.0, -1.0, 1.0, -4.0]
        assert knockoff_threshold(w, 0.5, plus=True) == float("inf")

    def test_all_zero(self):
        assert knockoff_threshold(np.zeros(5), 0.2) == float("inf")

    def test_rejects_bad_q(self):
        for q in (0.0, 1.0, -0.1, 2.0):
            with pytest.raises(InvalidArgumentError):
                knockoff_threshold([1.0], q)

    def test_matches_brute_force_scan(self):
        rng = np.random.default_rng(5)
        for trial in range(500):
            length = rng.integers(1, 13)
            w = rng.choice([-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0], size=length)
            w *= rng.choice([0.5, 1.0], size=length)
            for q in (0.1, 0.2, 0.5):
                for plus in (False, True):
                    assert knockoff_threshold(w, q, plus) == brute_force_threshold(w, q, plus)

    def test_empirical_fdr_certificate(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            w = rng.standard_normal(12)
            q = 0.4
            t = knockoff_threshold(w, q)
            if np.isinf(t):
                continue
            ratio = np.count_nonzero(w <= -t) / max(np.count_nonzero(w >= t), 1)
            assert ratio <= q
            smaller = [c for c in np.unique(np.abs(w[w != 0.0])) if c < t]
            for c in smaller:
                r = np.count_nonzero(w <= -c) / max(np.count_nonzero(w >= c), 1)
                assert r > q


class TestSelectAndEvaluate:
    def test_counting(self):
        sel = select_and_evaluate([5.0, 4.0, 0.0, 0.0, 0.0], 3.0, truth=[0], m=5)
        np.testing.assert_array_equal(sel.S_hat, [0, 1])
        assert sel.fdp == 0.5
        assert sel.power == 1.0

    def test_empty_selection_has_zero_fdp(self):
        sel = select_and_evaluate([1.0, -1.0], float("inf"), truth=[0], m=2)
        assert sel.S_hat.size == 0
        assert sel.fdp == 0.0
        assert sel.power == 0.0

    def test_composed_with_threshold(self):
        w = np.array([3.0, 2.0, -1.0, 1.0, -4.0])
        t = knockoff_threshold(w, 0.5)
        sel = select_and_evaluate(w, t, truth=[0], m=5)
        np.testing.assert_array_equal(sel.S_hat, [0, 1])
        assert sel.fdp == 0.5
        assert sel.power == 1.0

    def test_metrics_absent_without_truth(self):
        sel = select_and_evaluate([1.0], 0.5)
        assert sel.fdp is None and sel.power is None


class TestMsRatioCurve:
    def test_identical_when_w_equals_ws(self):
        stats = compute_w_statistics([3.0, 0.0, 1.0], [1.0, 0.0, 2.0])
        # coordinate 3: knockoff wins with Z>0 -> W=-2, Ws=-1 differ; pick one without
        stats = compute_w_statistics([3.0, 2.0], [1.0, 0.5])
        curves = ms_ratio_curve(stats, [0.5, 1.0, 2.5])
        np.testing.assert_array_equal(curves[:, 0], curves[:, 1])

    def test_hand_count(self):
        stats = compute_w_statistics([3.0, 1.0], [1.0, 4.0])
        # W = (3, -4); Ws = (3, -1)
        curves = ms_ratio_curve(stats, [2.0])
        assert curves[0, 0] == pytest.approx(0.5)
        assert curves[0, 1] == pytest.approx(1.0)

    def test_domination_on_random_inputs(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            z = rng.uniform(0, 3, size=10)
            zt = rng.uniform(0, 3, size=10)
            stats = compute_w_statistics(z, zt)
            ts = np.unique(np.abs(np.concatenate([stats.W, stats.W_s])))
            ts = ts[ts > 0]
            if ts.size == 0:
                continue
            curves = ms_ratio_curve(stats, ts)
            assert np.all(curves[:, 0] <= curves[:, 1] + 1e-12)

    def test_null_restriction(self):
        stats = compute_w_statistics([3.0, 2.0, 1.0], [1.0, 3.0, 0.0])
        curves = ms_ratio_curve(stats, [1.5], null_set=[1])
        # restricted to {W=-3}: numerator 0, denominator 1+1
        assert curves[0, 0] == pytest.approx(0.0)

    def test_rejects_nonpositive_threshold(self):
        stats = compute_w_statistics([1.0], [0.0])
        with pytest.raises(InvalidArgumentError):
            ms_ratio_curve(stats, [0.0])
