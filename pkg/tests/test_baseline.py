import numpy as np
import pytest

from skf.augment import StructuralProblem
from skf.baseline import (
    baseline_knockoff_select,
    build_fixed_knockoff,
    joint_path_statistics,
    normalize_columns,
    reduce_generalized_lasso,
)
from skf.errors import InfeasibleDimensionError, RankDeficiencyError
from skf.experiments import make_D
from skf.filters import compute_w_statistics
from skf.path import make_lambda_grid


class TestReduceGeneralizedLasso:
    def test_identity_transform_is_bit_identical(self, rng):
        x = rng.standard_normal((30, 5))
        y = rng.standard_normal(30)
        problem = StructuralProblem(x, y, np.eye(5))
        red = reduce_generalized_lasso(problem)
        np.testing.assert_array_equal(red.y_r, y)
        np.testing.assert_array_equal(red.X_r, x)
        np.testing.assert_array_equal(red.U, np.eye(30))
        assert red.D_0.shape == (5, 0)

    def test_difference_operator_reduction(self, rng):
        p = 6
        x = rng.standard_normal((30, p))
        y = rng.standard_normal(30)
        d = make_D("D2", p)
        problem = StructuralProblem(x, y, d)
        red = reduce_generalized_lasso(problem)
        assert red.U.shape == (30, 30 - p + (p - 1))
        np.testing.assert_allclose(red.U.T @ red.U, np.eye(red.U.shape[1]), atol=1e-8)
        assert np.max(np.abs(red.U.T @ (x @ red.D_0))) <= 1e-8
        # D_0 spans ker(D)
        assert np.max(np.abs(d @ red.D_0)) <= 1e-8
        # reconstruction: beta = D^+ gamma + D_0 gamma_0 reproduces X beta
        beta = rng.standard_normal(p)
        gamma = d @ beta
        gamma_0 = red.D_0.T @ beta
        np.testing.assert_allclose(
            x @ (red.D_dagger @ gamma + red.D_0 @ gamma_0), x @ beta, atol=1e-8
        )

    def test_repeated_row_rank_deficiency(self, rng):
        x = rng.standard_normal((30, 4))
        d = np.array([[1.0, 0.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0]])
        with pytest.raises(RankDeficiencyError):
            reduce_generalized_lasso(StructuralProblem(x, np.zeros(30), d))

    def test_m_greater_than_p_rejected(self, rng):
        x = rng.standard_normal((30, 3))
        with pytest.raises(RankDeficiencyError):
            reduce_generalized_lasso(StructuralProblem(x, np.zeros(30), make_D("D3", 3)))

    def test_too_few_rows(self, rng):
        x = rng.standard_normal((7, 4))
        with pytest.raises(InfeasibleDimensionError):
            reduce_generalized_lasso(StructuralProblem(x, np.zeros(7), np.eye(4)))


class TestBuildFixedKnockoff:
    def test_orthogonal_design(self, rng):
        q, _ = np.linalg.qr(rng.standard_normal((60, 10)))
        x_tilde = build_fixed_knockoff(q)
        # Sigma = I -> s = 1 and X^T X_tilde = 0
        assert np.max(np.abs(q.T @ x_tilde)) <= 1e-8
        np.testing.assert_allclose(x_tilde.T @ x_tilde, np.eye(10), atol=1e-8)

    def test_gram_identities_random(self, rng):
        x_r = rng.standard_normal((60, 10))
        x_hat = normalize_columns(x_r)
        x_tilde = build_fixed_knockoff(x_r)
        sigma = x_hat.T @ x_hat
        s_val = min(2.0 * np.linalg.eigvalsh(sigma)[0], 1.0)
        assert np.max(np.abs(x_tilde.T @ x_tilde - sigma)) <= 1e-8
        assert np.max(np.abs(x_hat.T @ x_tilde - (sigma - s_val * np.eye(10)))) <= 1e-8

    def test_dimension_gate(self, rng):
        with pytest.raises(InfeasibleDimensionError):
            build_fixed_knockoff(rng.standard_normal((10, 10)))


class TestBaselineKnockoffSelect:
    def test_zero_response_selects_nothing(self, rng):
        x = rng.standard_normal((30, 5))
        problem = StructuralProblem(x, np.zeros(30), np.eye(5))
        res = baseline_knockoff_select(problem, make_lambda_grid(0, -3, 0.05), q=0.2)
        np.testing.assert_array_equal(res.Z, np.zeros(5))
        np.testing.assert_array_equal(res.Z_tilde, np.zeros(5))
        assert res.selection.S_hat.size == 0

    def test_joint_path_kkt_certified(self, rng):
        x = rng.standard_normal((40, 6))
        beta = np.array([2.0, -2.0, 0.0, 0.0, 0.0, 0.0])
        y = x @ beta + 0.3 * rng.standard_normal(40)
        problem = StructuralProblem(x, y, np.eye(6))
        red = reduce_generalized_lasso(problem)
        x_hat = normalize_columns(red.X_r)
        x_tilde = build_fixed_knockoff(red.X_r)
        grid = make_lambda_grid(0, -4, 0.05)
        z, z_tilde, residuals = joint_path_statistics(x_hat, x_tilde, red.y_r, grid)
        assert residuals.max() <= 1e-7
        assert z.shape == (6,) and z_tilde.shape == (6,)

    def test_exchange_invariance_of_abs_w(self, rng):
        # swapping a null column with its knockoff flips W_j, leaving |W| unchanged
        x = rng.standard_normal((40, 6))
        beta = np.array([2.5, -2.5, 0.0, 0.0, 0.0, 0.0])
        y = x @ beta + 0.25 * rng.standard_normal(40)
        problem = StructuralProblem(x, y, np.eye(6))
        red = reduce_generalized_lasso(problem)
        x_hat = normalize_columns(red.X_r)
        x_tilde = build_fixed_knockoff(red.X_r)
        grid = make_lambda_grid(0, -5, 0.02)
        z, zt, _ = joint_path_statistics(x_hat, x_tilde, red.y_r, grid)
        w = compute_w_statistics(z, zt).W

        j = 4  # null coordinate
        x_hat_sw, x_tilde_sw = x_hat.copy(), x_tilde.copy()
        x_hat_sw[:, j], x_tilde_sw[:, j] = x_tilde[:, j].copy(), x_hat[:, j].copy()
        z_sw, zt_sw, _ = joint_path_statistics(x_hat_sw, x_tilde_sw, red.y_r, grid)
        w_sw = compute_w_statistics(z_sw, zt_sw).W
        np.testing.assert_allclose(
            np.sort(np.abs(w_sw)), np.sort(np.abs(w)), atol=1e-7
        )
        # untouched coordinates keep their statistics up to solver tolerance
        keep = np.arange(6) != j
        np.testing.assert_allclose(w_sw[keep], w[keep], atol=1e-7)

    def test_difference_statistic_toggle(self, rng):
        x = rng.standard_normal((40, 5))
        y = x @ np.array([2.0, 0.0, 0.0, 0.0, 0.0]) + 0.2 * rng.standard_normal(40)
        problem = StructuralProblem(x, y, np.eye(5))
        grid = make_lambda_grid(0, -3, 0.05)
        res = baseline_knockoff_select(problem, grid, q=0.2, statistic="difference")
        np.testing.assert_allclose(res.W, res.Z - res.Z_tilde)
