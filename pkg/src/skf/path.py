"""Split-LASSO regularization path and the two-stage significance statistics.

Stage 0 solves, on a descending ``lambda`` grid,

    min_{beta, gamma}  ||y - X beta||^2 / (2n)
                     + ||D beta - gamma||^2 / (2 nu)
                     + lambda ||gamma||_1.

``beta`` is eliminated in closed form, ``beta(gamma) = A^{-1}(X^T y / n +
D^T gamma / nu)`` with ``A = Sigma_X + D^T D / nu``, which turns the problem
into a gamma-space LASSO whose Gram matrix is exactly ``C_nu`` from the
augmented system. Coordinate descent with warm starts solves that grid;
every accepted point carries a certified stationarity residual.

Stages 1 and 2 refit the residue ``y_tilde - A_beta beta(lambda)`` with the
orthogonal designs ``A_gamma`` and ``A_gamma_tilde``; both have the closed
form of a coordinate-wise soft threshold, from which the path-order
(emergence lambda and sign) or coefficient-magnitude statistics are read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cd import lasso_grid_cd
from .augment import AugmentedSystem, SplitKnockoffCopy, StructuralProblem
from .errors import ConvergenceError, InvalidArgumentError
from .linalg import DEFAULT_TOLS, Tolerances, pseudo_inverse

__all__ = [
    "LambdaGrid",
    "SplitPath",
    "SignificanceStats",
    "make_lambda_grid",
    "solve_split_lasso_path",
    "stage1_statistics",
    "stage2_statistics",
]

PATH_ORDER = "path-order"
MAGNITUDE = "magnitude"


@dataclass(frozen=True)
class LambdaGrid:
    """Descending geometric grid ``lambda_k = 10^(log10_max - k * step)``."""

    log10_max: float
    log10_min: float
    step: float
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def locate(self, lam: float) -> int:
        """Index of ``lam`` on the grid, or raise if it is not a grid point."""
        idx = int(np.argmin(np.abs(self.values - lam)))
        if abs(self.values[idx] - lam) > 1e-9 * max(abs(lam), 1e-300):
            raise InvalidArgumentError(f"lambda_hat {lam!r} is not on the grid")
        return idx


def make_lambda_grid(
    log10_max: float = 0.0, log10_min: float = -6.0, step: float = 0.01
) -> LambdaGrid:
    """Build the grid; the default (0, -6, 0.01) has 601 points from 1 to 1e-6."""
    log10_max, log10_min, step = float(log10_max), float(log10_min), float(step)
    if not (np.isfinite(log10_max) and np.isfinite(log10_min) and np.isfinite(step)):
        raise InvalidArgumentError("grid bounds and step must be finite")
    if log10_max <= log10_min:
        raise InvalidArgumentError(
            f"log10_max must exceed log10_min, got ({log10_max}, {log10_min})"
        )
    if step <= 0:
        raise InvalidArgumentError(f"step must be positive, got {step}")
    count = int(np.floor((log10_max - log10_min) / step + 1e-9)) + 1
    values = 10.0 ** (log10_max - step * np.arange(count))
    return LambdaGrid(log10_max, log10_min, step, values)


@dataclass(frozen=True)
class SplitPath:
    """Stage-0 solution along the grid, with certified KKT residuals."""

    nu: float
    grid: LambdaGrid
    beta_path: np.ndarray  # (n_lambda, p)
    gamma_path: np.ndarray  # (n_lambda, m)
    kkt_residuals: np.ndarray  # (n_lambda,)


@dataclass(frozen=True)
class SignificanceStats:
    """Per-coordinate feature/knockoff significance and their truncation."""

    Z: np.ndarray
    r: np.ndarray
    Z_prime: np.ndarray
    r_prime: np.ndarray
    Z_tilde: np.ndarray
    mode: str
    lambda_hat: float | None = None


def solve_split_lasso_path(
    problem: StructuralProblem,
    nu: float,
    grid: LambdaGrid,
    tol: float = DEFAULT_TOLS.kkt_residual,
    max_sweeps: int = 100_000,
    tols: Tolerances = DEFAULT_TOLS,
) -> SplitPath:
    """Solve the split-LASSO path at relaxation ``nu``.

    Each grid point is warm-started from the previous one and accepted only
    when its stationarity residual is at or below ``tol``; otherwise a
    ``ConvergenceError`` carrying the worst residual is raised.
    """
    nu = float(nu)
    if not np.isfinite(nu) or nu <= 0:
        raise InvalidArgumentError(f"nu must be positive, got {nu}")
    X, y, D = problem.X, problem.y, problem.D
    n, p, m = problem.n, problem.p, problem.m
    sigma_x = X.T @ X / n
    a = sigma_x + D.T @ D / nu
    rhs = np.concatenate([(X.T @ y / n)[:, np.newaxis], D.T / nu], axis=1)
    try:
        sol = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError:
        sol = pseudo_inverse(a, tols.rank_rtol) @ rhs
    beta_ridge = sol[:, 0]
    g = sol[:, 1:]  # A^{-1} D^T / nu, maps gamma to the beta correction
    q = (np.eye(m) - D @ g) / nu
    q = (q + q.T) / 2.0
    lin = D @ beta_ridge / nu

    gamma_path, residuals = lasso_grid_cd(
        np.ascontiguousarray(q),
        np.ascontiguousarray(lin),
        np.ascontiguousarray(grid.values),
        0.5 * tol,
        int(max_sweeps),
    )
    worst = float(residuals.max()) if residuals.size else 0.0
    if worst > tol:
        raise ConvergenceError(
            f"split-LASSO path failed to reach residual {tol:g} "
            f"within {max_sweeps} sweeps (worst {worst:g})",
            worst,
        )
    beta_path = beta_ridge[np.newaxis, :] + gamma_path @ g.T
    return SplitPath(nu, grid, beta_path, gamma_path, residuals)


def _emergence(coef: np.ndarray, grid: LambdaGrid) -> tuple[np.ndarray, np.ndarray]:
    """Largest grid lambda at which each coordinate is active, and its sign there.

    ``coef[k, i]`` is the (already thresholded) stage solution at
    ``grid.values[k]``; the grid is descending, so the first active index
    along axis 0 is the emergence point.
    """
    active = coef != 0.0
    ever = active.any(axis=0)
    first = np.argmax(active, axis=0)
    z = np.where(ever, grid.values[first], 0.0)
    signs = np.sign(coef[first, np.arange(coef.shape[1])])
    r = np.where(ever, signs, 0.0)
    return z, r


def _stage_statistics(
    scores: np.ndarray, nu: float, grid: LambdaGrid, mode: str, lambda_hat: float | None
) -> tuple[np.ndarray, np.ndarray]:
    """Shared stage-1/stage-2 logic on the score matrix ``scores[k, i]``.

    The stage solution at grid point ``k`` is the coordinate-wise soft
    threshold ``S(scores[k], lambda_k * nu)``.
    """
    lam_nu = grid.values[:, np.newaxis] * nu
    coef = np.sign(scores) * np.maximum(np.abs(scores) - lam_nu, 0.0)
    if mode == PATH_ORDER:
        return _emergence(coef, grid)
    if mode == MAGNITUDE:
        if lambda_hat is None:
            raise InvalidArgumentError("magnitude mode requires lambda_hat")
        k = grid.locate(float(lambda_hat))
        return np.abs(coef[k]), np.sign(coef[k])
    raise InvalidArgumentError(f"unknown mode {mode!r}")


def stage1_statistics(
    path: SplitPath,
    problem: StructuralProblem,
    mode: str = PATH_ORDER,
    lambda_hat: float | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Feature significance ``(Z, r)``.

    The stage-1 solution at each grid point is
    ``S(D beta(lambda), lambda * nu)`` thanks to the orthogonal design of
    ``A_gamma``; path order reads the emergence lambda and its sign,
    magnitude reads ``|gamma(lambda_hat)|`` and its sign.
    """
    scores = path.beta_path @ problem.D.T
    return _stage_statistics(scores, path.nu, path.grid, mode, lambda_hat)


def stage2_statistics(
    path: SplitPath,
    aug: AugmentedSystem,
    copy: SplitKnockoffCopy,
    r: np.ndarray,
    mode: str = PATH_ORDER,
    lambda_hat: float | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Knockoff significance ``(Z', r', Z_tilde)``.

    The stage-2 solution is ``S(nu * c(lambda), lambda * nu)`` with residual
    correlation ``c(lambda) = A_gamma_tilde^T (y_tilde - A_beta beta(lambda))``.
    ``Z_tilde`` keeps ``Z'`` only where the knockoff emerges with the same
    sign as the feature did in stage 1.
    """
    r = np.asarray(r, dtype=float).ravel()
    if r.shape[0] != aug.m:
        raise InvalidArgumentError("stage-1 sign vector has wrong length")
    t = copy.A_gamma_tilde.T @ aug.y_tilde
    u = copy.A_gamma_tilde.T @ aug.A_beta
    c = t[np.newaxis, :] - path.beta_path @ u.T
    z_prime, r_prime = _stage_statistics(path.nu * c, path.nu, path.grid, mode, lambda_hat)
    z_tilde = np.where(r == r_prime, z_prime, 0.0)
    return z_prime, r_prime, z_tilde
