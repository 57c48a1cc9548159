"""Classical fixed-design knockoff baseline on the reduced problem.

When ``rank(D) = m <= p`` the structural problem reduces to a plain sparse
regression: with ``D_0`` spanning ``ker(D)`` and ``U`` an orthonormal
complement of ``col(X D_0)``, the transformed data ``(U^T y, U^T X D^+)``
regress directly on the sparse ``gamma``. A standard equi-correlated
knockoff of the reduced design then runs through the same path solver and
filter as the split method, giving the comparison baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._cd import lasso_grid_cd
from .augment import StructuralProblem
from .errors import (
    ConvergenceError,
    InfeasibleDimensionError,
    InvalidArgumentError,
    RankDeficiencyError,
)
from .filters import Selection, compute_w_statistics, knockoff_threshold, select_and_evaluate
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    min_eigenvalue_sym,
    orthonormal_complement,
    pseudo_inverse,
    sym_sqrt_factor,
)
from .path import LambdaGrid, _emergence

__all__ = [
    "ReducedProblem",
    "BaselineResult",
    "reduce_generalized_lasso",
    "build_fixed_knockoff",
    "normalize_columns",
    "joint_path_statistics",
    "baseline_knockoff_select",
]


@dataclass(frozen=True)
class ReducedProblem:
    """Reduced regression ``(U^T y, U^T X D^+)`` with its transform factors."""

    y_r: np.ndarray
    X_r: np.ndarray
    U: np.ndarray
    D_dagger: np.ndarray
    D_0: np.ndarray


@dataclass(frozen=True)
class BaselineResult:
    """Joint-path knockoff statistics and the resulting selection."""

    Z: np.ndarray
    Z_tilde: np.ndarray
    W: np.ndarray
    T_q: float
    selection: Selection
    kkt_residuals: np.ndarray


def reduce_generalized_lasso(
    problem: StructuralProblem, tols: Tolerances = DEFAULT_TOLS
) -> ReducedProblem:
    """Reduce the structural problem to sparse regression in ``gamma``.

    Requires full row rank ``rank(D) = m <= p`` and ``n >= p + m`` so that a
    fixed-design knockoff of the reduced design exists. For ``m = p`` the
    kernel of ``D`` is trivial and ``U`` is the identity.
    """
    n, p, m = problem.n, problem.p, problem.m
    if m > p:
        raise RankDeficiencyError(f"reduction needs m <= p, got m={m}, p={p}")
    if n < p + m:
        raise InfeasibleDimensionError(
            f"fixed-design knockoffs on the reduction need n >= p + m, "
            f"got n={n}, p={p}, m={m}"
        )
    _, sv, vt = np.linalg.svd(problem.D, full_matrices=True)
    rank = int(np.sum(sv > tols.rank_rtol * sv[0])) if sv.size and sv[0] > 0 else 0
    if rank < m:
        raise RankDeficiencyError(f"D has rank {rank} < m = {m}")
    d_dagger = pseudo_inverse(problem.D, tols.rank_rtol)
    d_0 = vt[rank:].T  # orthonormal basis of ker(D), shape (p, p - m)
    if d_0.shape[1] == 0:
        u = np.eye(n)
        return ReducedProblem(problem.y.copy(), problem.X @ d_dagger, u, d_dagger, d_0)
    u = orthonormal_complement(problem.X @ d_0, n - p + rank, tols.rank_rtol)
    return ReducedProblem(u.T @ problem.y, u.T @ problem.X @ d_dagger, u, d_dagger, d_0)


def normalize_columns(x) -> np.ndarray:
    """Scale each column to unit Euclidean norm (zero columns are left alone)."""
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=0)
    return x / np.where(norms > 0, norms, 1.0)


def build_fixed_knockoff(x_r, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Equi-correlated fixed-design knockoff of ``x_r`` (columns unit-normalized).

    With correlation Gram ``Sigma = Xhat^T Xhat`` and
    ``s = min(2 lambda_min(Sigma), 1)``, returns ``X_tilde`` satisfying
    ``X_tilde^T X_tilde = Sigma`` and ``Xhat^T X_tilde = Sigma - diag(s)``.
    """
    x_r = np.asarray(x_r, dtype=float)
    if x_r.ndim != 2:
        raise InvalidArgumentError("design must be a 2-D matrix")
    n, m = x_r.shape
    if n < 2 * m:
        raise InfeasibleDimensionError(
            f"fixed-design knockoffs need at least 2 columns' worth of rows, "
            f"got shape {x_r.shape}"
        )
    x_hat = normalize_columns(x_r)
    sigma = x_hat.T @ x_hat
    sigma = (sigma + sigma.T) / 2.0
    s_val = min(2.0 * max(min_eigenvalue_sym(sigma, tols), 0.0), 1.0)
    s = np.full(m, s_val)
    sigma_inv = pseudo_inverse(sigma, tols.rank_rtol)
    cs = sigma_inv * s[np.newaxis, :]
    u = orthonormal_complement(x_hat, m, tols.rank_rtol)
    k = sym_sqrt_factor(np.diag(2.0 * s) - s[:, np.newaxis] * cs, tols)
    return x_hat @ (np.eye(m) - cs) + u @ k


def joint_path_statistics(
    x_hat,
    x_tilde,
    y_r,
    grid: LambdaGrid,
    tol: float = DEFAULT_TOLS.kkt_residual,
    max_sweeps: int = 100_000,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Emergence lambdas ``(Z, Z_tilde)`` on the joint ``[x_hat, x_tilde]`` path.

    Solves ``min_b ||y_r - [x_hat, x_tilde] b||^2 / (2 n_r) + lam ||b||_1``
    over the grid with the same certified kernel as the split path; also
    returns the per-grid-point KKT residuals.
    """
    joint = np.concatenate([np.asarray(x_hat, float), np.asarray(x_tilde, float)], axis=1)
    y_r = np.asarray(y_r, dtype=float).ravel()
    n_r = joint.shape[0]
    m = joint.shape[1] // 2
    gram = joint.T @ joint / n_r
    gram = (gram + gram.T) / 2.0
    lin = joint.T @ y_r / n_r
    coef_path, residuals = lasso_grid_cd(
        np.ascontiguousarray(gram),
        np.ascontiguousarray(lin),
        np.ascontiguousarray(grid.values),
        0.5 * tol,
        int(max_sweeps),
    )
    worst = float(residuals.max()) if residuals.size else 0.0
    if worst > tol:
        raise ConvergenceError(
            f"joint knockoff path failed to reach residual {tol:g} (worst {worst:g})",
            worst,
        )
    z_all, _ = _emergence(coef_path, grid)
    return z_all[:m], z_all[m:], residuals


def baseline_knockoff_select(
    problem: StructuralProblem,
    grid: LambdaGrid,
    q: float = 0.2,
    plus: bool = False,
    truth=None,
    statistic: str = "signed-max",
    tol: float = DEFAULT_TOLS.kkt_residual,
    max_sweeps: int = 100_000,
    tols: Tolerances = DEFAULT_TOLS,
) -> BaselineResult:
    """Run the standard knockoff filter on the reduced problem.

    Solves the LASSO path on the concatenated design ``[Xhat, X_tilde]``
    over ``grid``; ``Z_i`` and ``Z_tilde_i`` are the emergence lambdas of
    feature ``i`` and its knockoff. ``statistic`` picks how they combine:
    ``"signed-max"`` (default) matches the split-knockoff combination
    ``(-1)^{1(Zt > Z)} (Z v Zt)``, ``"difference"`` uses ``Z - Zt``.
    """
    reduced = reduce_generalized_lasso(problem, tols)
    x_hat = normalize_columns(reduced.X_r)
    x_tilde = build_fixed_knockoff(reduced.X_r, tols)
    z, z_tilde, residuals = joint_path_statistics(
        x_hat, x_tilde, reduced.y_r, grid, tol, max_sweeps
    )
    m = x_hat.shape[1]
    if statistic == "signed-max":
        w = compute_w_statistics(z, z_tilde).W
    elif statistic == "difference":
        w = z - z_tilde
    else:
        raise InvalidArgumentError(f"unknown statistic {statistic!r}")
    t_q = knockoff_threshold(w, q, plus)
    selection = select_and_evaluate(w, t_q, truth=truth, m=m, q=q, plus=plus)
    return BaselineResult(z, z_tilde, w, t_q, selection, residuals)
