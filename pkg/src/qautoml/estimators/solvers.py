"""Solvers operating directly on precomputed Gram matrices.

These are the numerical cores behind the kernel estimators: an SMO solver for
the SVM duals (classification and epsilon-regression) and Cholesky solves for
kernel ridge regression and Gaussian-process regression.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .._deadline import check_deadline

SVM_TOL = 1e-3
MAX_PASSES = 10_000
_TAU = 1e-12


class SolverError(ValueError):
    pass


class ConvergenceWarning(UserWarning):
    pass


@dataclass
class DualSolution:
    """SMO result. ``coef`` multiplies kernel columns: f(x) = coef . k(x) + intercept."""

    alpha: np.ndarray
    coef: np.ndarray
    intercept: float
    converged: bool
    kkt_gap: float
    iterations: int


def _smo(Q, p, y, C, tol, max_iter):
    """Minimize 0.5 a'Qa + p'a  s.t.  y'a = 0, 0 <= a <= C  (LIBSVM formulation, WSS2)."""
    n = p.size
    a = np.zeros(n)
    G = p.astype(float).copy()
    QD = np.diag(Q).copy()
    gap = np.inf
    converged = False
    it = 0
    pos = y > 0
    for it in range(1, max_iter + 1):
        if it % 256 == 0:
            check_deadline()
        yG = -y * G
        at_upper = a >= C
        at_lower = a <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        if not up.any() or not low.any():
            gap = 0.0
            converged = True
            break
        masked = np.where(up, yG, -np.inf)
        i = int(np.argmax(masked))
        m = masked[i]
        M = np.min(np.where(low, yG, np.inf))
        gap = m - M
        if gap <= tol:
            converged = True
            break
        cand = low & (yG < m)
        b = m - yG
        quad = QD[i] + QD - 2 * y[i] * y * Q[i]
        quad = np.where(quad > 0, quad, _TAU)
        j = int(np.argmin(np.where(cand, -(b * b) / quad, np.inf)))

        ai, aj = a[i], a[j]
        Qij = Q[i, j]
        if y[i] != y[j]:
            q = QD[i] + QD[j] + 2 * Qij
            q = q if q > 0 else _TAU
            delta = (-G[i] - G[j]) / q
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            q = QD[i] + QD[j] - 2 * Qij
            q = q if q > 0 else _TAU
            delta = (G[i] - G[j]) / q
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
                if nj > C:
                    nj, ni = C, total - C
            else:
                if nj < 0:
                    nj, ni = 0.0, total
                if ni < 0:
                    ni, nj = 0.0, total
        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        a[i], a[j] = ni, nj
    else:
        yG = -y * G
        up = np.where(pos, a < C, a > 0)
        low = np.where(pos, a > 0, a < C)
        gap = (np.max(yG[up]) if up.any() else 0.0) - (np.min(yG[low]) if low.any() else 0.0)
        converged = gap <= tol
    np.clip(a, 0.0, C, out=a)
    return a, G, converged, float(max(gap, 0.0)), it


def _rho(a, G, y, C):
    yG = y * G
    free = (a > 0) & (a < C)
    if free.any():
        return float(np.mean(yG[free]))
    at_upper = a >= C
    ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
    lb_mask = ~ub_mask
    ub = np.min(yG[ub_mask]) if ub_mask.any() else np.inf
    lb = np.max(yG[lb_mask]) if lb_mask.any() else -np.inf
    if not np.isfinite(ub):
        return float(lb)
    if not np.isfinite(lb):
        return float(ub)
    return float(0.5 * (ub + lb))


def _square(K):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise SolverError(f"Gram matrix must be square, got {K.shape}")
    return K


def svm_dual_solve(K, y, C: float, tol: float = SVM_TOL, max_passes: int = MAX_PASSES) -> DualSolution:
    """Binary C-SVM dual; labels must be +-1."""
    K = _square(K)
    y = np.asarray(y, dtype=float).ravel()
    if y.size != K.shape[0]:
        raise SolverError("label count does not match Gram size")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise SolverError("SVM labels must be -1 or +1")
    if not C > 0:
        raise SolverError(f"C must be > 0, got {C}")
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    a, G, converged, gap, it = _smo(Q, -np.ones(n), y, C, tol, max_passes * n)
    if not converged:
        warnings.warn(f"SMO stopped after {it} iterations with KKT gap {gap:.3g}", ConvergenceWarning)
    rho = _rho(a, G, y, C)
    return DualSolution(a, a * y, -rho, converged, gap, it)


def svr_dual_solve(K, y, C: float, epsilon: float, tol: float = SVM_TOL, max_passes: int = MAX_PASSES) -> DualSolution:
    """epsilon-SVR dual over 2N variables (alpha, alpha*) with the same SMO core."""
    K = _square(K)
    y = np.asarray(y, dtype=float).ravel()
    if y.size != K.shape[0]:
        raise SolverError("target count does not match Gram size")
    if not C > 0 or not epsilon >= 0:
        raise SolverError(f"need C > 0 and epsilon >= 0, got C={C}, epsilon={epsilon}")
    n = y.size
    sign = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([epsilon - y, epsilon + y])
    K2 = np.block([[K, K], [K, K]])
    Q = (sign[:, None] * sign[None, :]) * K2
    a, G, converged, gap, it = _smo(Q, p, sign, C, tol, max_passes * 2 * n)
    if not converged:
        warnings.warn(f"SMO stopped after {it} iterations with KKT gap {gap:.3g}", ConvergenceWarning)
    rho = _rho(a, G, sign, C)
    return DualSolution(a, a[:n] - a[n:], -rho, converged, gap, it)


def svm_decision(K_cross, sol: DualSolution) -> np.ndarray:
    """Decision values for rows of ``K_cross`` (shape (M, N_train))."""
    return np.asarray(K_cross) @ sol.coef + sol.intercept


def kkt_violation(K, y, sol: DualSolution, C: float) -> float:
    """Maximal-violating-pair gap m(a) - M(a) recomputed from scratch."""
    y = np.asarray(y, dtype=float)
    a = sol.alpha
    G = (y[:, None] * y[None, :] * K) @ a - 1.0
    yG = -y * G
    up = np.where(y > 0, a < C, a > 0)
    low = np.where(y > 0, a > 0, a < C)
    if not up.any() or not low.any():
        return 0.0
    return float(max(np.max(yG[up]) - np.min(yG[low]), 0.0))


def _cholesky(A):
    try:
        return cho_factor(A, lower=True, check_finite=True)
    except LinAlgError as exc:
        raise SolverError(f"Cholesky factorization failed: {exc}") from exc


def krr_fit(K, y, alpha: float) -> np.ndarray:
    """Weights ``(K + alpha I)^-1 y``."""
    K = _square(K)
    if not alpha > 0:
        raise SolverError(f"alpha must be > 0, got {alpha}")
    A = K + alpha * np.eye(K.shape[0])
    return cho_solve(_cholesky(A), np.asarray(y, dtype=float))


def krr_predict(K_cross, weights) -> np.ndarray:
    return np.asarray(K_cross) @ weights


@dataclass
class GPRState:
    factor: tuple
    weights: np.ndarray


def gpr_fit(K, y, noise: float) -> GPRState:
    K = _square(K)
    if not noise > 0:
        raise SolverError(f"noise variance must be > 0, got {noise}")
    factor = _cholesky(K + noise * np.eye(K.shape[0]))
    return GPRState(factor, cho_solve(factor, np.asarray(y, dtype=float)))


def gpr_predict(state: GPRState, K_cross, K_diag) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance; variance clamped at zero."""
    K_cross = np.atleast_2d(np.asarray(K_cross, dtype=float))
    mean = K_cross @ state.weights
    v = cho_solve(state.factor, K_cross.T)
    var = np.asarray(K_diag, dtype=float) - np.sum(K_cross.T * v, axis=0)
    return mean, np.maximum(var, 0.0)
