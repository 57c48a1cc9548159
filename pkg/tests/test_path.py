import numpy as np
import pytest

from conftest import random_problem
from oracles import ista_split_lasso
from skf.augment import (
    AugmentedSystem,
    SplitKnockoffCopy,
    StructuralProblem,
    build_augmented,
    build_split_knockoff,
)
from skf.errors import ConvergenceError, InvalidArgumentError
from skf.path import (
    SplitPath,
    make_lambda_grid,
    solve_split_lasso_path,
    stage1_statistics,
    stage2_statistics,
)


def kkt_recompute(problem, nu, path):
    """Stationarity residuals recomputed from scratch, independent of the solver."""
    x, y, d = problem.X, problem.y, problem.D
    n = problem.n
    sigma = x.T @ x / n
    a = sigma + d.T @ d / nu
    xty = x.T @ y / n
    worst = 0.0
    for k, lam in enumerate(path.grid.values):
        beta = path.beta_path[k]
        gamma = path.gamma_path[k]
        res_beta = np.max(np.abs(-a @ beta + d.T @ gamma / nu + xty))
        sub = d @ beta / nu - gamma / nu  # equals lam * rho(lam) at optimum
        active = gamma != 0.0
        res_active = np.max(np.abs(sub[active] - lam * np.sign(gamma[active]))) if active.any() else 0.0
        res_inactive = max(np.max(np.abs(sub[~active])) - lam, 0.0) if (~active).any() else 0.0
        worst = max(worst, res_beta, res_active, res_inactive)
    return worst


class TestMakeLambdaGrid:
    def test_default_grid(self):
        grid = make_lambda_grid(0, -6, 0.01)
        assert len(grid) == 601
        assert grid.values[0] == pytest.approx(1.0)
        assert grid.values[-1] == pytest.approx(1e-6, rel=1e-12)
        assert np.all(np.diff(grid.values) < 0)

    def test_three_point_grid(self):
        grid = make_lambda_grid(0, -1, 0.5)
        np.testing.assert_allclose(grid.values, [1.0, 10 ** -0.5, 0.1])

    def test_rejects_inverted_bounds(self):
        with pytest.raises(InvalidArgumentError):
            make_lambda_grid(-1, 0, 0.1)

    def test_rejects_bad_step(self):
        with pytest.raises(InvalidArgumentError):
            make_lambda_grid(0, -1, 0.0)

    def test_partial_last_step_stays_above_min(self):
        grid = make_lambda_grid(0, -1, 0.3)
        assert len(grid) == 4
        assert grid.values[-1] >= 0.1 - 1e-12

    def test_locate(self):
        grid = make_lambda_grid(0, -2, 0.1)
        assert grid.locate(grid.values[7]) == 7
        with pytest.raises(InvalidArgumentError):
            grid.locate(0.123456)


class TestSolveSplitLassoPath:
    def test_ridge_solution_above_lambda_max(self, rng):
        problem, _ = random_problem(rng, 30, 6, "D2")
        nu = 1.0
        grid = make_lambda_grid(1, -3, 0.05)
        path = solve_split_lasso_path(problem, nu, grid)
        sigma = problem.X.T @ problem.X / problem.n
        a = sigma + problem.D.T @ problem.D / nu
        beta_ridge = np.linalg.solve(a, problem.X.T @ problem.y / problem.n)
        lam_max = np.max(np.abs(problem.D @ beta_ridge)) / nu
        top = grid.values >= lam_max
        assert top.any()
        assert np.all(path.gamma_path[top] == 0.0)
        assert np.max(np.abs(path.beta_path[top] - beta_ridge[np.newaxis, :])) <= 1e-10

    def test_zero_response(self, rng):
        x = rng.standard_normal((20, 4))
        problem = StructuralProblem(x, np.zeros(20), np.eye(4))
        path = solve_split_lasso_path(problem, 2.0, make_lambda_grid(0, -4, 0.1))
        assert np.all(path.beta_path == 0.0)
        assert np.all(path.gamma_path == 0.0)

    def test_against_proximal_oracle(self, rng):
        x = rng.standard_normal((30, 5))
        beta = np.array([1.5, -1.0, 0.0, 0.0, 0.8])
        y = x @ beta + 0.3 * rng.standard_normal(30)
        problem = StructuralProblem(x, y, np.eye(5))
        nu = 0.7
        grid = make_lambda_grid(0, -3, 0.01)
        path = solve_split_lasso_path(problem, nu, grid)
        for k in np.linspace(0, len(grid) - 1, 10).astype(int):
            lam = grid.values[k]
            _, gamma_ref = ista_split_lasso(x, y, np.eye(5), nu, lam, tol=1e-9)
            assert np.max(np.abs(path.gamma_path[k] - gamma_ref)) <= 1e-6

    def test_kkt_residuals_recomputed_independently(self, rng):
        problem, _ = random_problem(rng, 40, 8, "D2")
        for nu in (0.5, 5.0):
            path = solve_split_lasso_path(problem, nu, make_lambda_grid(0, -4, 0.05))
            assert kkt_recompute(problem, nu, path) <= 1e-7

    def test_warm_start_matches_cold_start(self, rng):
        problem, _ = random_problem(rng, 25, 5, "D1")
        nu = 1.3
        grid = make_lambda_grid(0, -2, 0.2)
        warm = solve_split_lasso_path(problem, nu, grid)
        for k, lam in enumerate(grid.values):
            single = make_lambda_grid(np.log10(lam) + 1e-12, np.log10(lam) - 1e-12, 1.0)
            cold = solve_split_lasso_path(
                problem, nu, type(grid)(0.0, 0.0, 1.0, np.array([lam]))
            )
            assert np.max(np.abs(warm.gamma_path[k] - cold.gamma_path[0])) <= 1e-6

    def test_convergence_error_carries_residual(self, rng):
        problem, _ = random_problem(rng, 25, 5, "D2")
        with pytest.raises(ConvergenceError) as info:
            solve_split_lasso_path(problem, 1.0, make_lambda_grid(0, -3, 0.5), max_sweeps=0)
        assert info.value.worst_residual > 0


def constant_score_path(scores, grid, nu, p=None):
    """SplitPath whose D beta(lambda) is constant; D = I on the scores."""
    scores = np.asarray(scores, dtype=float)
    n_lam = len(grid)
    beta_path = np.tile(scores, (n_lam, 1))
    gamma_path = np.zeros_like(beta_path)
    return SplitPath(nu, grid, beta_path, gamma_path, np.zeros(n_lam))


class TestStage1:
    def test_constant_scores_emergence(self, rng):
        # gamma_i(lam) = S(c_i, lam*nu) is active iff lam < |c_i| / nu
        nu = 0.5
        grid = make_lambda_grid(1, -2, 0.01)
        path = constant_score_path([2.0, -1.0, 0.0], grid, nu)
        problem = StructuralProblem(rng.standard_normal((5, 3)), np.zeros(5), np.eye(3))
        z, r = stage1_statistics(path, problem)
        np.testing.assert_allclose(z[:2], [4.0, 2.0], rtol=0.03)
        assert z[2] == 0.0
        np.testing.assert_array_equal(r, [1.0, -1.0, 0.0])

    def test_never_active(self, rng):
        x = rng.standard_normal((20, 4))
        problem = StructuralProblem(x, np.zeros(20), np.eye(4))
        path = solve_split_lasso_path(problem, 1.0, make_lambda_grid(0, -3, 0.1))
        z, r = stage1_statistics(path, problem)
        np.testing.assert_array_equal(z, np.zeros(4))
        np.testing.assert_array_equal(r, np.zeros(4))

    def test_magnitude_at_top_of_path(self, rng):
        problem, _ = random_problem(rng, 30, 5, "D1", k_signal=2, snr=0.5)
        grid = make_lambda_grid(2, -2, 0.05)  # top lambda shrinks everything to zero
        path = solve_split_lasso_path(problem, 1.0, grid)
        z, r = stage1_statistics(path, problem, mode="magnitude", lambda_hat=grid.values[0])
        np.testing.assert_array_equal(z, np.zeros(5))

    def test_magnitude_needs_grid_lambda(self, rng):
        problem, _ = random_problem(rng, 30, 5, "D1")
        path = solve_split_lasso_path(problem, 1.0, make_lambda_grid(0, -2, 0.1))
        with pytest.raises(InvalidArgumentError):
            stage1_statistics(path, problem, mode="magnitude", lambda_hat=0.1234)
        with pytest.raises(InvalidArgumentError):
            stage1_statistics(path, problem, mode="magnitude", lambda_hat=None)

    def test_activation_sets_nested(self, rng):
        nu = 0.8
        grid = make_lambda_grid(1, -3, 0.02)
        scores = rng.standard_normal(6)
        lam_nu = grid.values[:, None] * nu
        active = np.abs(scores[None, :]) > lam_nu
        nested = active[:-1] <= active[1:]  # once active, stays active as lam decreases
        assert np.all(nested)


def synthetic_stage2_inputs(c_tilde, nu, grid, n=6):
    """Augmented system + copy whose stage-2 correlation is constant c_tilde."""
    m = len(c_tilde)
    p = 2
    y_tilde = np.zeros(n + m)
    y_tilde[0] = 1.0
    a_tilde = np.zeros((n + m, m))
    a_tilde[0, :] = np.asarray(c_tilde, dtype=float)
    aug = AugmentedSystem(
        nu,
        y_tilde,
        np.zeros((n + m, p)),
        np.zeros((n + m, m)),
        np.eye(p),
        np.zeros((p, m)),
        np.eye(m) / nu,
    )
    copy = SplitKnockoffCopy(a_tilde, np.zeros(m), 0.1)
    n_lam = len(grid)
    path = SplitPath(nu, grid, np.zeros((n_lam, p)), np.zeros((n_lam, m)), np.zeros(n_lam))
    return aug, copy, path


class TestStage2:
    def test_constant_correlation_emergence(self):
        grid = make_lambda_grid(0, -2, 0.01)
        aug, copy, path = synthetic_stage2_inputs([0.5, -0.2], nu=2.0, grid=grid)
        z_prime, r_prime, z_tilde = stage2_statistics(path, aug, copy, r=np.array([1.0, -1.0]))
        np.testing.assert_allclose(z_prime, [0.5, 0.2], rtol=0.03)
        np.testing.assert_array_equal(r_prime, [1.0, -1.0])
        np.testing.assert_allclose(z_tilde, z_prime)

    def test_sign_truncation(self):
        grid = make_lambda_grid(0, -2, 0.01)
        aug, copy, path = synthetic_stage2_inputs([0.5, 0.2], nu=2.0, grid=grid)
        z_prime, r_prime, z_tilde = stage2_statistics(path, aug, copy, r=np.array([1.0, -1.0]))
        np.testing.assert_array_equal(r_prime, [1.0, 1.0])
        assert z_tilde[0] == pytest.approx(z_prime[0])
        assert z_tilde[1] == 0.0

    def test_degenerate_copy_equals_stage1(self, rng):
        problem, _ = random_problem(rng, 40, 8, "D2")
        nu = 1.5
        grid = make_lambda_grid(0, -4, 0.02)
        aug = build_augmented(problem, nu)
        copy = build_split_knockoff(aug, np.zeros(problem.m))  # A_gamma itself
        path = solve_split_lasso_path(problem, nu, grid)
        z, r = stage1_statistics(path, problem)
        z_prime, r_prime, z_tilde = stage2_statistics(path, aug, copy, r)
        np.testing.assert_array_equal(z_prime, z)
        np.testing.assert_array_equal(r_prime, r)
        np.testing.assert_array_equal(z_tilde, z)
