"""Knockoff statistics W and W^s, data-dependent thresholds and metrics.

``W_i`` carries the larger of feature/knockoff significance with a sign
indicating which won; ``W^s_i`` carries the feature significance ``Z_i`` as
magnitude with the same sign, so ``|W^s| <= |W|`` and the selection ratio
``M_t`` computed from ``W`` is dominated by the one from ``W^s``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "WStatistics",
    "Selection",
    "compute_w_statistics",
    "knockoff_threshold",
    "select_and_evaluate",
    "ms_ratio_curve",
]


@dataclass(frozen=True)
class WStatistics:
    """Signed statistics ``W`` and their symmetrized companion ``W^s``."""

    W: np.ndarray
    W_s: np.ndarray


@dataclass(frozen=True)
class Selection:
    """Selection at threshold ``T_q`` with optional truth-based metrics."""

    q: float
    plus: bool
    T_q: float
    S_hat: np.ndarray  # 0-based selected indices
    fdp: float | None = None
    power: float | None = None


def compute_w_statistics(z, z_tilde) -> WStatistics:
    """Combine ``(Z, Z_tilde)`` into ``W`` and ``W^s``.

    ``W_i`` is ``Z_i`` when the feature wins, ``-Z_tilde_i`` when the
    knockoff wins and 0 on ties; ``W^s_i`` replaces the losing magnitude by
    ``Z_i`` so that sign(W^s) = sign(W) and |W^s| <= |W|.
    """
    z = np.asarray(z, dtype=float).ravel()
    zt = np.asarray(z_tilde, dtype=float).ravel()
    if z.shape != zt.shape:
        raise InvalidArgumentError("Z and Z_tilde must have equal length")
    if np.any(z < 0) or np.any(zt < 0):
        raise InvalidArgumentError("Z and Z_tilde must be nonnegative")
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(zt))):
        raise InvalidArgumentError("Z and Z_tilde must be finite")
    w = np.where(z > zt, z, np.where(z < zt, -zt, 0.0))
    w_s = z * np.sign(z - zt)
    return WStatistics(w, w_s)


def knockoff_threshold(w, q: float, plus: bool = False) -> float:
    """Smallest candidate ``t`` with ``(#{W <= -t} + plus) / max(#{W >= t}, 1) <= q``.

    Candidates are the distinct nonzero magnitudes ``|W_i|``; returns
    ``inf`` when no candidate qualifies.
    """
    w = np.asarray(w, dtype=float).ravel()
    q = float(q)
    if not 0 < q < 1:
        raise InvalidArgumentError(f"q must lie in (0, 1), got {q}")
    offset = 1.0 if plus else 0.0
    for t in np.unique(np.abs(w[w != 0.0])):
        neg = np.count_nonzero(w <= -t)
        pos = np.count_nonzero(w >= t)
        if (neg + offset) / max(pos, 1) <= q:
            return float(t)
    return float("inf")


def select_and_evaluate(
    w,
    t_q: float,
    truth=None,
    m: int | None = None,
    q: float = 0.2,
    plus: bool = False,
) -> Selection:
    """Selected set ``{i : W_i >= T_q}`` plus FDP/power against optional truth.

    ``truth`` holds the 0-based nonnull indices; metrics use the ``|S| v 1``
    convention in denominators and are ``None`` when truth is absent.
    """
    w = np.asarray(w, dtype=float).ravel()
    if m is not None and int(m) != w.shape[0]:
        raise InvalidArgumentError("m does not match the length of W")
    s_hat = np.flatnonzero(w >= t_q)
    fdp = power = None
    if truth is not None:
        s1 = np.asarray(truth, dtype=int).ravel()
        n_true = np.isin(s_hat, s1).sum()
        fdp = float((s_hat.size - n_true) / max(s_hat.size, 1))
        power = float(n_true / max(s1.size, 1))
    return Selection(q, bool(plus), float(t_q), s_hat, fdp, power)


def ms_ratio_curve(stats: WStatistics, thresholds, null_set=None) -> np.ndarray:
    """Ratio curves ``M_t(V) = #{V_i >= t} / (1 + #{V_i <= -t})`` for V in {W, W^s}.

    Returns an array of shape ``(len(thresholds), 2)`` with columns
    ``(M_t(W), M_t(W_s))``, restricted to ``null_set`` indices when given.
    """
    thresholds = np.asarray(thresholds, dtype=float).ravel()
    if np.any(thresholds <= 0):
        raise InvalidArgumentError("thresholds must be positive")
    w, w_s = stats.W, stats.W_s
    if null_set is not None:
        idx = np.asarray(null_set, dtype=int).ravel()
        w, w_s = w[idx], w_s[idx]
    out = np.empty((thresholds.shape[0], 2))
    for k, t in enumerate(thresholds):
        out[k, 0] = np.count_nonzero(w >= t) / (1 + np.count_nonzero(w <= -t))
        out[k, 1] = np.count_nonzero(w_s >= t) / (1 + np.count_nonzero(w_s <= -t))
    return out
