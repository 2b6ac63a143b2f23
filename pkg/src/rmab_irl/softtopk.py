"""Differentiable soft-top-k selection over index vectors.

p_i = sigmoid((w_i - theta) / epsilon) with theta chosen so the pull
probabilities sum to the budget K.  The sum is continuous and strictly
decreasing in theta, so theta is found by bisection; the Jacobian follows
from implicit differentiation of the budget constraint.  Limits: epsilon -> 0
recovers the hard top-k indicator, epsilon -> infinity the uniform K/N vector.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from .errors import DegenerateInputError, ParameterError

THETA_RESIDUAL_TOL = 1e-12
SATURATION_LOGITS = 40.0  # sigmoid is flat to double precision beyond this


def _check_inputs(w: np.ndarray, k: int, epsilon: float) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ParameterError(f"w must be a non-empty vector, got shape {w.shape}")
    if not np.isfinite(w).all():
        raise ParameterError("w must be finite")
    if not 0 < k <= w.size:
        raise ParameterError(f"need 0 < k <= {w.size}, got k={k}")
    if epsilon <= 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    return w


def soft_top_k(w: np.ndarray, k: int, epsilon: float) -> np.ndarray:
    """Pull probabilities summing to k, monotone in w.

    Bisects the threshold over [min w - 40 eps, max w + 40 eps]; the budget
    residual at the returned theta is below 1e-12 except in saturated corner
    cases (k = N), where it is bounded by N times sigmoid's tail mass.
    """
    w = _check_inputs(w, k, epsilon)
    theta = _solve_threshold(w, k, epsilon)
    return expit((w - theta) / epsilon)


def _solve_threshold(w: np.ndarray, k: int, epsilon: float) -> float:
    lo = float(w.min()) - SATURATION_LOGITS * epsilon
    hi = float(w.max()) + SATURATION_LOGITS * epsilon

    def residual(theta: float) -> float:
        return float(expit((w - theta) / epsilon).sum()) - k

    # sum is strictly decreasing in theta: residual(lo) >= 0 >= residual(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        res = residual(mid)
        if abs(res) <= THETA_RESIDUAL_TOL:
            return mid
        if res > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= np.finfo(float).eps * max(1.0, abs(lo), abs(hi)):
            break
    return 0.5 * (lo + hi)


def soft_top_k_jacobian(w: np.ndarray, k: int, epsilon: float) -> np.ndarray:
    """N x N matrix dp/dw via implicit differentiation of the budget.

    With g_i = sigmoid'((w_i - theta)/eps) / eps:
        dp_i/dw_j = delta_ij g_i - g_i g_j / sum(g).
    Rows sum to zero (the budget is constant) and the matrix is symmetric.
    """
    w = _check_inputs(w, k, epsilon)
    theta = _solve_threshold(w, k, epsilon)
    p = expit((w - theta) / epsilon)
    g = p * (1.0 - p) / epsilon
    total = g.sum()
    if total <= 0.0 or not np.isfinite(total):
        raise DegenerateInputError(
            "soft-top-k is fully saturated; the Jacobian is numerically degenerate"
        )
    return np.diag(g) - np.outer(g, g) / total


def soft_top_k_grad_dot(w: np.ndarray, k: int, epsilon: float, upstream: np.ndarray) -> np.ndarray:
    """Jacobian-vector product upstream @ (dp/dw) without forming the matrix.

    O(N); returns zeros in the fully saturated regime, where every dp/dw
    entry vanishes to double precision.
    """
    w = _check_inputs(w, k, epsilon)
    theta = _solve_threshold(w, k, epsilon)
    p = expit((w - theta) / epsilon)
    g = p * (1.0 - p) / epsilon
    total = g.sum()
    if total <= 0.0:
        return np.zeros_like(w)
    return g * upstream - g * float(g @ upstream) / total
