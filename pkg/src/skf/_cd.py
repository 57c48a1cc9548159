"""Compiled cyclic coordinate descent for quadratic LASSO problems.

Solves ``min_g 0.5 g^T Q g - lin^T g + lam * ||g||_1`` over a descending
``lam`` grid with warm starts. Both the split-LASSO path (Q = C_nu,
lin = D beta_ridge / nu) and the baseline joint-knockoff path reuse this
kernel.

Plain cyclic sweeps handle support changes; once the support is stable the
equality-restricted system ``Q_AA g_A = lin_A - lam * sign(g_A)`` is solved
directly (with a tiny ridge so near-singular Grams cannot blow up), which
short-circuits the slow tail of coordinate descent on ill-conditioned
problems. A direct solve is accepted only when it keeps every sign and the
*freshly recomputed* subgradient residual

    max_i  | grad_i + lam * sign(g_i) |   on the support,
           max(|grad_i| - lam, 0)         off the support,

with ``grad = Q g - lin``, certifies the point; accumulated update error
therefore cannot fake convergence.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _kkt_residual(grad, gamma, lam):
    worst = 0.0
    for i in range(gamma.shape[0]):
        g = gamma[i]
        if g > 0.0:
            v = abs(grad[i] + lam)
        elif g < 0.0:
            v = abs(grad[i] - lam)
        else:
            v = abs(grad[i]) - lam
            if v < 0.0:
                v = 0.0
        if v > worst:
            worst = v
    return worst


@njit(cache=True)
def _active_set_descent(Q, lin, gamma, lam, max_drops):
    """Direct solves of the sign-restricted system on the current support.

    Each pass solves ``Q_AA g_A = lin_A - lam * sign(g_A)``; if the solution
    keeps every active sign it is taken whole, otherwise gamma steps toward
    it until the first coordinate hits zero (a monotone decrease of the
    penalized objective on the sign orthant) and that coordinate leaves the
    support. The caller still has to verify global KKT.
    """
    m = gamma.shape[0]
    active = np.empty(m, np.int64)
    for _ in range(max_drops):
        na = 0
        for i in range(m):
            if gamma[i] != 0.0:
                active[na] = i
                na += 1
        if na == 0:
            return False
        qa = np.empty((na, na))
        rhs = np.empty(na)
        trace = 0.0
        for a in range(na):
            ia = active[a]
            for b in range(na):
                qa[a, b] = Q[ia, active[b]]
            trace += Q[ia, ia]
            rhs[a] = lin[ia] - lam * np.sign(gamma[ia])
        ridge = 1e-13 * (trace / na if trace > 0.0 else 1.0)
        for a in range(na):
            qa[a, a] += ridge
        sol = np.linalg.solve(qa, rhs)
        t_star = 1.0
        for a in range(na):
            g = gamma[active[a]]
            if sol[a] * g <= 0.0:
                t = g / (g - sol[a])
                if t < t_star:
                    t_star = t
        if t_star >= 1.0:
            for a in range(na):
                gamma[active[a]] = sol[a]
            return True
        for a in range(na):
            ia = active[a]
            g = gamma[ia]
            moved = g + t_star * (sol[a] - g)
            # coordinates attaining the limiting step leave the support exactly
            if sol[a] * g <= 0.0 and g / (g - sol[a]) <= t_star:
                gamma[ia] = 0.0
            elif g * moved <= 0.0 or moved == 0.0:
                gamma[ia] = 0.0
            else:
                gamma[ia] = moved
    return False


@njit(cache=True)
def _solve_one(Q, lin, gamma, lam, tol, max_sweeps):
    m = gamma.shape[0]
    grad = np.dot(Q, gamma) - lin
    worst = _kkt_residual(grad, gamma, lam)
    sweeps = 0
    cooldown = 0
    while worst > tol and sweeps < max_sweeps:
        support_changed = False
        for i in range(m):
            qii = Q[i, i]
            if qii <= 0.0:
                continue
            c = qii * gamma[i] - grad[i]
            if c > lam:
                g_new = (c - lam) / qii
            elif c < -lam:
                g_new = (c + lam) / qii
            else:
                g_new = 0.0
            delta = g_new - gamma[i]
            if delta != 0.0:
                if (gamma[i] == 0.0) != (g_new == 0.0):
                    support_changed = True
                gamma[i] = g_new
                for j in range(m):
                    grad[j] += Q[j, i] * delta
        sweeps += 1
        if not support_changed and cooldown == 0:
            if _active_set_descent(Q, lin, gamma, lam, 40):
                grad = np.dot(Q, gamma) - lin
                worst = _kkt_residual(grad, gamma, lam)
                if worst <= tol:
                    return worst, sweeps
            grad = np.dot(Q, gamma) - lin
            cooldown = 3
        elif cooldown > 0:
            cooldown -= 1
        if sweeps % 64 == 0:
            grad = np.dot(Q, gamma) - lin
        worst = _kkt_residual(grad, gamma, lam)
        if worst <= tol:
            grad = np.dot(Q, gamma) - lin
            worst = _kkt_residual(grad, gamma, lam)
    return worst, sweeps


@njit(cache=True)
def lasso_grid_cd(Q, lin, lams, tol, max_sweeps):
    """Warm-started coordinate descent over a descending lambda grid.

    Returns ``(path, residuals)`` where ``path[k]`` solves the problem at
    ``lams[k]`` and ``residuals[k]`` is its certified KKT residual (may
    exceed ``tol`` if the sweep budget ran out; the caller must check).
    """
    nlam = lams.shape[0]
    m = Q.shape[0]
    gamma = np.zeros(m)
    path = np.empty((nlam, m))
    residuals = np.empty(nlam)
    for k in range(nlam):
        worst, _ = _solve_one(Q, lin, gamma, lams[k], tol, max_sweeps)
        path[k, :] = gamma
        residuals[k] = worst
    return path, residuals
