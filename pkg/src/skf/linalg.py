"""Dense linear-algebra and proximal primitives used by every other module.

All routines are pure functions of their inputs, use orthogonal
decompositions (SVD / symmetric eigendecomposition) for anything
rank-sensitive, and share one tolerance record (:class:`Tolerances`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleDimensionError, InvalidArgumentError, NotPSDError

__all__ = [
    "Tolerances",
    "DEFAULT_TOLS",
    "soft_threshold",
    "pseudo_inverse",
    "orthonormal_complement",
    "min_eigenvalue_sym",
    "sym_sqrt_factor",
    "constrained_least_squares",
]


@dataclass(frozen=True)
class Tolerances:
    """Central numerical tolerances.

    rank_rtol
        Singular values below ``rank_rtol * sigma_max`` count as zero.
    psd_clamp_rtol
        Eigenvalues in ``[-psd_clamp_rtol * ||M||, 0)`` are clamped to zero
        when factoring a PSD matrix.
    psd_reject_rtol
        Eigenvalues below ``-psd_reject_rtol * ||M||`` reject the input as
        not PSD.
    gram_residual
        Max-abs residual at which Gram identities count as satisfied.
    symmetry_abs
        Max-abs asymmetry tolerated before an input is rejected as
        non-symmetric (relative to ``max(1, ||M||_max)``).
    kkt_residual
        Certified stationarity residual for regularization-path solutions.
    """

    rank_rtol: float = 1e-10
    psd_clamp_rtol: float = 1e-8
    psd_reject_rtol: float = 1e-6
    gram_residual: float = 1e-8
    symmetry_abs: float = 1e-10
    kkt_residual: float = 1e-7


DEFAULT_TOLS = Tolerances()


def _as_finite_array(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.size == 0:
        raise InvalidArgumentError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite entries")
    return arr


def soft_threshold(x, t: float) -> np.ndarray:
    """Coordinate-wise shrinkage ``sign(x_i) * max(|x_i| - t, 0)``.

    Parameters
    ----------
    x : array_like
        Input vector.
    t : float
        Nonnegative threshold.
    """
    arr = _as_finite_array(x, "x")
    t = float(t)
    if not np.isfinite(t) or t < 0:
        raise InvalidArgumentError(f"threshold must be finite and >= 0, got {t}")
    return np.sign(arr) * np.maximum(np.abs(arr) - t, 0.0)


def pseudo_inverse(m, rank_rtol: float = DEFAULT_TOLS.rank_rtol) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rank_rtol * sigma_max`` are treated as zero.
    """
    arr = _as_finite_array(m, "matrix")
    if arr.ndim != 2:
        raise InvalidArgumentError("pseudo_inverse expects a 2-D matrix")
    return np.linalg.pinv(arr, rcond=rank_rtol)


def matrix_rank(m, rank_rtol: float = DEFAULT_TOLS.rank_rtol) -> int:
    """Numerical rank: number of singular values above ``rank_rtol * sigma_max``."""
    arr = np.asarray(m, dtype=float)
    if arr.size == 0:
        return 0
    sv = np.linalg.svd(arr, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.sum(sv > rank_rtol * sv[0]))


def orthonormal_complement(
    b, r: int, rank_rtol: float = DEFAULT_TOLS.rank_rtol
) -> np.ndarray:
    """First ``r`` orthonormal directions orthogonal to the column space of ``b``.

    Returns ``U`` of shape ``(n, r)`` with ``U^T U = I_r`` and ``U^T b = 0``.
    The basis comes from the left singular vectors past the numerical rank,
    so it is deterministic for a fixed input.

    Raises
    ------
    InfeasibleDimensionError
        If ``r > n - rank(b)``, i.e. the complement is too small.
    """
    arr = np.asarray(b, dtype=float)
    if arr.ndim != 2:
        raise InvalidArgumentError("orthonormal_complement expects a 2-D matrix")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("matrix contains non-finite entries")
    n = arr.shape[0]
    r = int(r)
    if r < 0:
        raise InvalidArgumentError("r must be >= 0")
    if arr.shape[1] == 0:
        if r > n:
            raise InfeasibleDimensionError(f"requested {r} directions in R^{n}")
        return np.eye(n)[:, :r]
    u, sv, _ = np.linalg.svd(arr, full_matrices=True)
    rank = int(np.sum(sv > rank_rtol * sv[0])) if sv.size and sv[0] > 0 else 0
    if r > n - rank:
        raise InfeasibleDimensionError(
            f"complement of a rank-{rank} subspace in R^{n} has only "
            f"{n - rank} directions, requested {r}"
        )
    return u[:, rank : rank + r]


def min_eigenvalue_sym(m, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Smallest eigenvalue of a symmetric matrix.

    Raises
    ------
    InvalidArgumentError
        If the input is asymmetric beyond ``tols.symmetry_abs`` (relative to
        ``max(1, ||M||_max)``).
    """
    arr = _as_finite_array(m, "matrix")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError("min_eigenvalue_sym expects a square matrix")
    scale = max(1.0, float(np.max(np.abs(arr))))
    asym = float(np.max(np.abs(arr - arr.T)))
    if asym > tols.symmetry_abs * scale:
        raise InvalidArgumentError(f"matrix is asymmetric (max |M - M^T| = {asym:g})")
    return float(np.linalg.eigvalsh((arr + arr.T) / 2.0)[0])


def sym_sqrt_factor(m, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Factor ``K`` with ``K^T K = M`` for symmetric PSD ``M``.

    Small negative eigenvalues (within ``tols.psd_reject_rtol`` of zero,
    relative to the spectral norm) are clamped to zero; anything more
    negative rejects the input.
    """
    arr = _as_finite_array(m, "matrix")
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InvalidArgumentError("sym_sqrt_factor expects a square matrix")
    sym = (arr + arr.T) / 2.0
    w, v = np.linalg.eigh(sym)
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if scale > 0 and w[0] < -tols.psd_reject_rtol * scale:
        raise NotPSDError(
            f"matrix is not PSD: lambda_min = {w[0]:g} vs norm {scale:g}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)).T


def constrained_least_squares(
    x, y, d, support, rank_rtol: float = DEFAULT_TOLS.rank_rtol
) -> np.ndarray:
    """Least squares ``min 0.5 ||y - X b||^2`` subject to ``(D b)_i = 0`` off ``support``.

    ``support`` holds the 0-based row indices of ``D`` that are left
    unconstrained. The constraint is eliminated through an orthonormal
    null-space basis of the constrained rows; a singular reduced system
    falls back to the minimum-norm solution.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    d = np.asarray(d, dtype=float)
    if x.shape[0] != y.shape[0]:
        raise InvalidArgumentError("X and y row counts differ")
    if x.shape[1] != d.shape[1]:
        raise InvalidArgumentError("X and D column counts differ")
    m, p = d.shape
    support = np.asarray(support, dtype=int).ravel()
    if support.size and (support.min() < 0 or support.max() >= m):
        raise InvalidArgumentError("support indices out of range")
    constrained = np.setdiff1d(np.arange(m), support)
    if constrained.size == 0:
        return np.linalg.lstsq(x, y, rcond=rank_rtol)[0]
    dc = d[constrained]
    _, sv, vt = np.linalg.svd(dc, full_matrices=True)
    rank = int(np.sum(sv > rank_rtol * sv[0])) if sv.size and sv[0] > 0 else 0
    basis = vt[rank:].T
    if basis.shape[1] == 0:
        return np.zeros(p)
    z = np.linalg.lstsq(x @ basis, y, rcond=rank_rtol)[0]
    return basis @ z
