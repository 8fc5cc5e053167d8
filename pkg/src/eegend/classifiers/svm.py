"""Soft-margin RBF support vector machine trained by SMO.

The dual ``min 1/2 a'Qa - e'a`` s.t. ``0 <= a_i <= C``, ``y'a = 0`` is solved
with pairwise updates; the working pair is the maximal violator ``i`` plus
the ``j`` with the best second-order gain (Fan, Chen & Lin, 2005). Training
stops when the KKT gap ``m(a) - M(a)`` drops below ``tol``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, ConvergenceError, DataError

logger = logging.getLogger(__name__)

TAU = 1e-12
SV_EPS = 1e-8


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d2 = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-gamma * d2)


def default_gamma(X) -> float:
    """``1 / (d * mean per-feature variance)``, or ``1/d`` for constant data."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    var = float(X.var(axis=0).mean())
    d = X.shape[1]
    return 1.0 / (d * var) if var > 0 else 1.0 / d


@dataclass(frozen=True)
class SvmModel:
    support_vectors: np.ndarray
    support_indices: np.ndarray
    dual_coef: np.ndarray      # alpha_i * y_i
    bias: float
    gamma: float
    C: float
    tol: float = 1e-3
    n_iter: int = 0
    kkt_gap: float = 0.0
    objective_history: tuple = field(default=(), repr=False)

    kind = "SVM"

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.support_vectors.shape[1]:
            raise DataError(f"expected {self.support_vectors.shape[1]} features, got {X.shape[1]}")
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias

    def predict(self, X) -> np.ndarray:
        # score 0 goes to ADHD, matching the other classifiers' tie rule
        return (self.decision_function(X) >= 0).astype(int)

    def params(self) -> dict:
        return {
            "support_vectors": self.support_vectors.tolist(),
            "support_indices": self.support_indices.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "n_iter": self.n_iter,
            "kkt_gap": self.kkt_gap,
        }

    def hyperparams(self) -> dict:
        return {"C": self.C, "gamma": self.gamma, "tol": self.tol}


def _select_working_set(G, alpha, y, K, C, tol):
    """Return ``(i, j, gap)``; ``i = j = -1`` once the gap is below ``tol``."""
    minus_yG = -y * G
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    if not up.any() or not low.any():
        return -1, -1, 0.0
    cand_up = np.where(up, minus_yG, -np.inf)
    i = int(np.argmax(cand_up))
    m = cand_up[i]
    M = float(np.min(np.where(low, minus_yG, np.inf)))
    gap = m - M
    if gap < tol:
        return -1, -1, gap
    b = m - minus_yG
    ok = low & (b > 0)
    a = K[i, i] + np.diag(K) - 2.0 * K[i]
    a = np.where(a > 0, a, TAU)
    gain = np.where(ok, -(b * b) / a, np.inf)
    j = int(np.argmin(gain))
    return i, j, gap


def _dual_objective(alpha, G):
    # f(a) = 1/2 a'Qa - e'a with G = Qa - e
    return 0.5 * float(alpha @ G) - 0.5 * float(alpha.sum())


def smo_solve(K, y, C: float, tol: float, max_iter: int, record_objective: bool = False):
    """Solve the SVM dual for kernel matrix ``K`` and labels ``y`` in {-1, +1}.

    Returns ``(alpha, G, n_iter, gap, history)`` where ``history`` holds the
    dual objective ``sum(a) - 1/2 a'Qa`` after every update if requested.
    """
    n = y.size
    alpha = np.zeros(n)
    G = -np.ones(n)
    history = [0.0] if record_objective else []
    it = 0
    gap = np.inf
    while True:
        i, j, gap = _select_working_set(G, alpha, y, K, C, tol)
        if i < 0:
            break
        if it >= max_iter:
            raise ConvergenceError(
                f"SMO did not reach KKT gap {tol} within {max_iter} updates (gap {gap:.3g})"
            )
        it += 1
        Kij = K[i, j]
        ai, aj = alpha[i], alpha[j]
        quad = K[i, i] + K[j, j] - 2.0 * Kij
        if quad <= 0:
            quad = TAU
        if y[i] != y[j]:
            delta = (-G[i] - G[j]) / quad
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
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total
        dai, daj = ni - ai, nj - aj
        alpha[i], alpha[j] = ni, nj
        # Q[:, t] = y * y[t] * K[:, t]
        G += y * (y[i] * dai * K[:, i] + y[j] * daj * K[:, j])
        if record_objective:
            history.append(-_dual_objective(alpha, G))
    return alpha, G, it, float(gap), history


def _bias(alpha, G, y, C):
    free = (alpha > SV_EPS) & (alpha < C - SV_EPS)
    yG = y * G
    if free.any():
        return -float(yG[free].mean())
    # no free vectors: midpoint of the feasible interval
    up_bound = alpha >= C - SV_EPS
    low_bound = alpha <= SV_EPS
    ub_mask = (up_bound & (y < 0)) | (low_bound & (y > 0))
    lb_mask = (up_bound & (y > 0)) | (low_bound & (y < 0))
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    if np.isinf(ub) or np.isinf(lb):
        r = ub if np.isfinite(ub) else lb
    else:
        r = 0.5 * (ub + lb)
    return -float(r)


def svm_train(X, y, C: float = 1.0, gamma: float | None = None, tol: float = 1e-3,
              max_iter: int = 1_000_000, record_objective: bool = False) -> SvmModel:
    """Train an RBF SVM; ``y`` uses 1 for ADHD and 0 for HC."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y01 = np.asarray(y, dtype=int)
    if len(np.unique(y01)) < 2:
        raise DataError("SVM training needs both classes")
    if C <= 0 or tol <= 0:
        raise ConfigError("C and tol must be positive")
    if gamma is None:
        gamma = default_gamma(X)
    if gamma <= 0:
        raise ConfigError("gamma must be positive")
    ys = np.where(y01 == 1, 1.0, -1.0)
    K = rbf_kernel(X, X, gamma)
    alpha, G, it, gap, hist = smo_solve(K, ys, float(C), float(tol), int(max_iter), record_objective)
    b = _bias(alpha, G, ys, C)
    sv = np.flatnonzero(alpha > SV_EPS)
    logger.debug("SMO converged in %d updates, %d support vectors", it, sv.size)
    return SvmModel(X[sv].copy(), sv, alpha[sv] * ys[sv], b, float(gamma), float(C),
                    float(tol), it, gap, tuple(hist))
