"""Lifted regression system and the split knockoff copy matrix.

The structural model ``y = X beta + eps``, ``gamma = D beta`` is lifted to a
joint regression ``y_tilde = A_beta beta + A_gamma gamma + noise`` with

    y_tilde = [y/sqrt(n); 0_m]
    A_beta  = [X/sqrt(n); D/sqrt(nu)]
    A_gamma = [0_{n x m}; -I_m/sqrt(nu)]

so that ``A_gamma`` is an orthogonal design (``A_gamma^T A_gamma = I/nu``).
A split knockoff copy ``A_gamma_tilde`` reproduces the Gram structure of
``A_gamma`` while decorrelating from it by ``diag(s)``:

    (a) A_gamma_tilde^T A_gamma_tilde = I/nu
    (b) A_gamma^T A_gamma_tilde       = I/nu - diag(s)
    (c) A_beta^T  A_gamma_tilde       = -D^T/nu

The copy is built explicitly as
``A_gamma (I - C^{-1} diag(s)) + A_beta Sigma_bb^{-1} Sigma_bg C^{-1} diag(s) + U K``
with ``C = Sigma_gg - Sigma_gb Sigma_bb^+ Sigma_bg``, ``U`` an orthonormal
complement of ``[A_beta, A_gamma]`` and ``K^T K = 2 diag(s) - diag(s) C^{-1} diag(s)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InfeasibleDimensionError,
    InvalidArgumentError,
    InvalidSeparationError,
    NotPSDError,
)
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    matrix_rank,
    min_eigenvalue_sym,
    orthonormal_complement,
    pseudo_inverse,
    sym_sqrt_factor,
)

__all__ = [
    "StructuralProblem",
    "AugmentedSystem",
    "SplitKnockoffCopy",
    "CopyReport",
    "build_augmented",
    "equicorrelated_s",
    "build_split_knockoff",
    "verify_copy",
]


@dataclass(frozen=True)
class StructuralProblem:
    """Observed regression instance ``(X, y, D)``.

    ``X`` is ``n x p``, ``y`` has length ``n`` and ``D`` is ``m x p``. The
    sparse signal lives in ``gamma = D beta``; true coefficients appear only
    in simulation configs, never here.
    """

    X: np.ndarray
    y: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).ravel())
        object.__setattr__(self, "D", np.asarray(self.D, dtype=float))
        if self.X.ndim != 2 or self.D.ndim != 2:
            raise InvalidArgumentError("X and D must be 2-D matrices")
        if self.y.shape[0] != self.X.shape[0]:
            raise InvalidArgumentError(
                f"y has length {self.y.shape[0]} but X has {self.X.shape[0]} rows"
            )
        if self.D.shape[1] != self.X.shape[1]:
            raise InvalidArgumentError(
                f"D has {self.D.shape[1]} columns but X has {self.X.shape[1]}"
            )
        for name, arr in (("X", self.X), ("y", self.y), ("D", self.D)):
            if not np.all(np.isfinite(arr)):
                raise InvalidArgumentError(f"{name} contains non-finite entries")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class AugmentedSystem:
    """Lifted design at a fixed relaxation ``nu``, plus its Gram blocks."""

    nu: float
    y_tilde: np.ndarray
    A_beta: np.ndarray
    A_gamma: np.ndarray
    Sigma_bb: np.ndarray
    Sigma_bg: np.ndarray
    C_nu: np.ndarray

    @property
    def n(self) -> int:
        return self.A_beta.shape[0] - self.m

    @property
    def p(self) -> int:
        return self.A_beta.shape[1]

    @property
    def m(self) -> int:
        return self.A_gamma.shape[1]


@dataclass(frozen=True)
class SplitKnockoffCopy:
    """Copy matrix ``A_gamma_tilde`` with its separation vector ``s``."""

    A_gamma_tilde: np.ndarray
    s: np.ndarray
    eta: float


@dataclass(frozen=True)
class CopyReport:
    """Max-abs residuals of the three copy identities and a pass flag."""

    residual_gram: float
    residual_separation: float
    residual_cross: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        ok = max(self.residual_gram, self.residual_separation, self.residual_cross) <= self.tol
        object.__setattr__(self, "passed", bool(ok))


def build_augmented(
    problem: StructuralProblem, nu: float, tols: Tolerances = DEFAULT_TOLS
) -> AugmentedSystem:
    """Assemble the lifted system and Gram blocks at relaxation ``nu``."""
    nu = float(nu)
    if not np.isfinite(nu) or nu <= 0:
        raise InvalidArgumentError(f"nu must be positive, got {nu}")
    n, p, m = problem.n, problem.p, problem.m
    sn, snu = np.sqrt(n), np.sqrt(nu)
    y_tilde = np.concatenate([problem.y / sn, np.zeros(m)])
    A_beta = np.vstack([problem.X / sn, problem.D / snu])
    A_gamma = np.vstack([np.zeros((n, m)), -np.eye(m) / snu])
    Sigma_bb = problem.X.T @ problem.X / n + problem.D.T @ problem.D / nu
    Sigma_bg = -problem.D.T / nu
    # C_nu = Sigma_gg - Sigma_gb Sigma_bb^+ Sigma_bg, with Sigma_gg = I/nu.
    bb_pinv = pseudo_inverse(Sigma_bb, tols.rank_rtol)
    C_nu = np.eye(m) / nu - (problem.D / nu) @ bb_pinv @ (problem.D.T / nu)
    C_nu = (C_nu + C_nu.T) / 2.0
    return AugmentedSystem(nu, y_tilde, A_beta, A_gamma, Sigma_bb, Sigma_bg, C_nu)


def equicorrelated_s(
    C_nu, nu: float, eta: float = 0.1, tols: Tolerances = DEFAULT_TOLS
) -> np.ndarray:
    """Equi-correlated separation ``s_i = min((2 - eta) lambda_min(C_nu), 1/nu)``.

    A tiny negative ``lambda_min`` (within the PSD rejection tolerance) is
    clamped to zero so the returned vector always stays feasible.
    """
    nu = float(nu)
    eta = float(eta)
    if not np.isfinite(nu) or nu <= 0:
        raise InvalidArgumentError(f"nu must be positive, got {nu}")
    if not 0 < eta < 2:
        raise InvalidArgumentError(f"eta must lie in (0, 2), got {eta}")
    c = np.atleast_2d(np.asarray(C_nu, dtype=float))
    lam_min = min_eigenvalue_sym(c, tols)
    scale = float(np.max(np.abs(c)))
    if scale > 0 and lam_min < -tols.psd_reject_rtol * scale:
        raise NotPSDError(f"C_nu is not PSD: lambda_min = {lam_min:g}")
    s_val = min((2.0 - eta) * max(lam_min, 0.0), 1.0 / nu)
    return np.full(c.shape[0], s_val)


def build_split_knockoff(
    aug: AugmentedSystem,
    s,
    eta: float = 0.1,
    tols: Tolerances = DEFAULT_TOLS,
) -> SplitKnockoffCopy:
    """Construct the copy matrix satisfying the three Gram identities.

    Requires ``n >= m + p`` so an m-dimensional orthonormal complement of
    ``[A_beta, A_gamma]`` exists, and a feasible ``s`` (``s >= 0`` and
    ``2 C_nu - diag(s)`` PSD).
    """
    n, p, m = aug.n, aug.p, aug.m
    if n < m + p:
        raise InfeasibleDimensionError(
            f"split knockoffs require n >= m + p, got n={n}, m={m}, p={p}"
        )
    s = np.asarray(s, dtype=float).ravel()
    if s.shape[0] != m or not np.all(np.isfinite(s)):
        raise InvalidArgumentError("s must be a finite vector of length m")
    if np.any(s < -tols.gram_residual):
        raise InvalidSeparationError("s must be nonnegative")
    s = np.maximum(s, 0.0)
    if np.any(s > 1.0 / aug.nu + tols.gram_residual):
        raise InvalidSeparationError("s_i must not exceed 1/nu")
    feas = 2.0 * aug.C_nu - np.diag(s)
    feas_min = min_eigenvalue_sym(feas, tols)
    feas_scale = max(float(np.max(np.abs(feas))), 1e-300)
    if feas_min < -tols.psd_reject_rtol * feas_scale:
        raise InvalidSeparationError(
            f"2 C_nu - diag(s) is indefinite (lambda_min = {feas_min:g})"
        )

    if matrix_rank(aug.C_nu, tols.rank_rtol) < m:
        warnings.warn(
            "C_nu is rank-deficient; using its pseudo-inverse in the copy",
            RuntimeWarning,
            stacklevel=2,
        )
    c_inv = pseudo_inverse(aug.C_nu, tols.rank_rtol)
    bb_inv = pseudo_inverse(aug.Sigma_bb, tols.rank_rtol)
    cs = c_inv * s[np.newaxis, :]  # C^{-1} diag(s)

    # Any vector orthogonal to col(A_gamma) has zero bottom block, so the
    # complement of [A_beta, A_gamma] is exactly {[u; 0] : u \perp col(X)}.
    u_top = orthonormal_complement(aug.A_beta[:n], m, tols.rank_rtol)
    u_tilde = np.vstack([u_top, np.zeros((m, m))])
    k = sym_sqrt_factor(np.diag(2.0 * s) - s[:, np.newaxis] * cs, tols)

    copy = (
        aug.A_gamma @ (np.eye(m) - cs)
        + aug.A_beta @ (bb_inv @ (aug.Sigma_bg @ cs))
        + u_tilde @ k
    )
    return SplitKnockoffCopy(copy, s, float(eta))


def verify_copy(
    aug: AugmentedSystem, copy: SplitKnockoffCopy, tol: float = DEFAULT_TOLS.gram_residual
) -> CopyReport:
    """Recompute the three copy identities and report max-abs residuals."""
    m = aug.m
    at = copy.A_gamma_tilde
    if at.shape != aug.A_gamma.shape:
        raise InvalidArgumentError("copy and augmented system dimensions differ")
    res_gram = float(np.max(np.abs(at.T @ at - np.eye(m) / aug.nu)))
    res_sep = float(
        np.max(np.abs(aug.A_gamma.T @ at - (np.eye(m) / aug.nu - np.diag(copy.s))))
    )
    res_cross = float(np.max(np.abs(aug.A_beta.T @ at - aug.Sigma_bg)))
    return CopyReport(res_gram, res_sep, res_cross, tol)
