"""Whittle indices for a single restless arm, and their reward gradients.

The index of state u is the passive subsidy m at which acting and not acting
have equal Q-value.  The Q-gap Q^m(u,1) - Q^m(u,0) is monotone decreasing in
m under indexability, so the index is found by bisection.  Because the
subsidy Bellman equations are jointly linear in (rewards, m), each index is
an affine function of the reward vector once the optimal policy is frozen;
solving that linear system both polishes the bisected index to solver
precision and yields the exact gradient d index / d rewards.

All solvers treat one arm as an M-state MDP with actions {0, 1}; batched
variants stack arms along a leading axis and share one bisection.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import BracketingError, ParameterError, SolverError

VALUE_ITER_TOL = 1e-10
BISECT_TOL = 1e-8
INDIFFERENCE_TOL = 1e-6
MAX_WIDENINGS = 5


@dataclass(frozen=True)
class SubsidyQ:
    """Q-values and state values of the subsidy Bellman equations at one m."""

    q: np.ndarray  # (M, 2)
    v: np.ndarray  # (M,)
    subsidy: float


def subsidy_q_values(
    transitions: np.ndarray,
    rewards: np.ndarray,
    subsidy: float,
    gamma: float,
    tol: float = VALUE_ITER_TOL,
    max_iters: int = 200_000,
) -> SubsidyQ:
    """Value iteration for one arm with passive subsidy ``m``.

    Q(s, a) = m*[a == 0] + R(s) + gamma * sum_s' P(s, a, s') V(s').
    Iterates until the sup-norm change of V drops below ``tol``.
    """
    if tol <= 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if not 0.0 <= gamma <= 1.0:
        raise ParameterError(f"gamma must be in [0, 1], got {gamma}")
    p = np.asarray(transitions, dtype=float)
    r = np.asarray(rewards, dtype=float)
    m_states = r.shape[0]
    bonus = np.array([subsidy, 0.0])

    v = np.zeros(m_states)
    for _ in range(max_iters):
        q = bonus[None, :] + r[:, None] + gamma * np.einsum("sat,t->sa", p, v)
        v_new = q.max(axis=1)
        if np.max(np.abs(v_new - v)) < tol:
            return SubsidyQ(q=q, v=v_new, subsidy=float(subsidy))
        v = v_new
    raise SolverError(f"value iteration did not converge below {tol} (gamma={gamma})")


# ---------------------------------------------------------------------------
# batched exact solver (policy iteration)


def _solve_subsidy_batch(p, r, m, gamma, max_iters=100):
    """Exact Q and V for a batch of arms, one subsidy per arm.

    p: (B, M, 2, M), r: (B, M), m: (B,).  Policy iteration with passive
    preference on exact ties; each evaluation is a direct linear solve, so
    the returned values are fixed points to machine precision.
    """
    b, m_states = r.shape
    eye = np.eye(m_states)
    policy = np.zeros((b, m_states), dtype=np.int64)
    v = np.zeros((b, m_states))
    for _ in range(max_iters):
        p_pi = np.take_along_axis(p, policy[:, :, None, None], axis=2)[:, :, 0, :]
        r_pi = r + m[:, None] * (policy == 0)
        try:
            v = np.linalg.solve(eye[None] - gamma * p_pi, r_pi[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular policy-evaluation system (gamma={gamma})") from exc
        q = _q_from_values(p, r, m, gamma, v)
        new_policy = (q[:, :, 1] > q[:, :, 0]).astype(np.int64)
        if np.array_equal(new_policy, policy):
            return q, v, policy
        policy = new_policy
    # near-tie oscillation: values differ at rounding level, accept current
    return q, v, policy


def _q_from_values(p, r, m, gamma, v):
    q = np.empty((*r.shape, 2))
    future = gamma * np.einsum("bsat,bt->bsa", p, v)
    q[:, :, 0] = m[:, None] + r + future[:, :, 0]
    q[:, :, 1] = r + future[:, :, 1]
    return q


def _gap_batch(p, r, m, state, gamma):
    """Q(u,1) - Q(u,0) per arm; decreasing in m under indexability."""
    q, _, _ = _solve_subsidy_batch(p, r, m, gamma)
    return q[:, state, 1] - q[:, state, 0]


def _augmented_system(p, r, state, gamma, policy):
    """Linear system tying values and the indifference subsidy together.

    Unknown x = (V, m).  Value rows use the frozen policy with the action at
    ``state`` forced active; the last row encodes Q(u,0) = Q(u,1), i.e.
    m = gamma * (P(u,1,:) - P(u,0,:)) . V.  Returns the (B, M+1, M+1) matrix.
    """
    b, m_states = r.shape
    pol = policy.copy()
    pol[:, state] = 1
    p_pi = np.take_along_axis(p, pol[:, :, None, None], axis=2)[:, :, 0, :]
    a = np.zeros((b, m_states + 1, m_states + 1))
    a[:, :m_states, :m_states] = np.eye(m_states)[None] - gamma * p_pi
    a[:, :m_states, m_states] = -(pol == 0).astype(float)
    a[:, m_states, :m_states] = -gamma * (p[:, state, 1, :] - p[:, state, 0, :])
    a[:, m_states, m_states] = 1.0
    return a


def _polish_and_grad(p, r, state, gamma, m_bisect, want_grad):
    """Refine bisected indices via the augmented solve; optionally gradients.

    Falls back to the bisected value wherever the refined index does not
    actually shrink the indifference residual (wrong frozen policy).
    """
    b, m_states = r.shape
    _, _, policy = _solve_subsidy_batch(p, r, m_bisect, gamma)
    a = _augmented_system(p, r, state, gamma, policy)
    rhs = np.concatenate([r, np.zeros((b, 1))], axis=1)
    try:
        x = np.linalg.solve(a, rhs[..., None])[..., 0]
        m_exact = x[:, m_states]
        grad = None
        if want_grad:
            e = np.zeros((b, m_states + 1))
            e[:, m_states] = 1.0
            y = np.linalg.solve(np.swapaxes(a, 1, 2), e[..., None])[..., 0]
            grad = y[:, :m_states]
    except np.linalg.LinAlgError as exc:
        raise SolverError("singular indifference system; check gamma < 1") from exc

    gap_exact = np.abs(_gap_batch(p, r, m_exact, state, gamma))
    gap_bisect = np.abs(_gap_batch(p, r, m_bisect, state, gamma))
    keep = gap_exact <= gap_bisect + 1e-15
    m_out = np.where(keep, m_exact, m_bisect)
    return m_out, grad


def _bisect_indices(p, r, state, gamma, bisect_tol, lo=None, hi=None):
    """Batched bisection for the index of ``state`` across arms."""
    b = r.shape[0]
    span = np.max(np.abs(r), axis=1) / (1.0 - gamma)
    lo = -span if lo is None else np.full(b, float(lo))
    hi = +span if hi is None else np.full(b, float(hi))

    g_lo = _gap_batch(p, r, lo, state, gamma)
    g_hi = _gap_batch(p, r, hi, state, gamma)
    for _ in range(MAX_WIDENINGS):
        missing_lo = g_lo < 0
        missing_hi = g_hi > 0
        if not (missing_lo.any() or missing_hi.any()):
            break
        lo = np.where(missing_lo, 2.0 * lo, lo)
        hi = np.where(missing_hi, 2.0 * hi, hi)
        g_lo = np.where(missing_lo, _gap_batch(p, r, lo, state, gamma), g_lo)
        g_hi = np.where(missing_hi, _gap_batch(p, r, hi, state, gamma), g_hi)

    unbracketed = (g_lo < 0) | (g_hi > 0)
    # a zero-width bracket whose endpoints already sit at indifference is a
    # solution (e.g. the all-zero reward vector), not a bracketing failure
    degenerate = unbracketed & (np.abs(g_lo) <= INDIFFERENCE_TOL) & (np.abs(g_hi) <= INDIFFERENCE_TOL)
    if np.any(unbracketed & ~degenerate):
        arm = int(np.argmax(unbracketed & ~degenerate))
        raise BracketingError(
            f"no sign change of the Q-gap for arm {arm}, state {state} "
            f"after {MAX_WIDENINGS} widenings (gap at lo={g_lo[arm]:.3g}, hi={g_hi[arm]:.3g})"
        )

    active = ~degenerate
    for _ in range(200):
        if not active.any() or np.max(hi[active] - lo[active]) <= bisect_tol:
            break
        mid = 0.5 * (lo + hi)
        g_mid = _gap_batch(p, r, mid, state, gamma)
        take_lo = active & (g_mid > 0)
        take_hi = active & ~(g_mid > 0)
        lo = np.where(take_lo, mid, lo)
        hi = np.where(take_hi, mid, hi)
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# public API


def whittle_index(
    transitions: np.ndarray,
    rewards: np.ndarray,
    state: int,
    gamma: float,
    lo: float | None = None,
    hi: float | None = None,
    bisect_tol: float = BISECT_TOL,
) -> float:
    """Indifference subsidy of one state, by bisection on m.

    The default bracket is +-max|R|/(1-gamma), widened x2 up to five times
    if it misses the sign change.
    """
    _check_gamma(gamma)
    p = np.asarray(transitions, dtype=float)[None]
    r = np.asarray(rewards, dtype=float)[None]
    m = _bisect_indices(p, r, state, gamma, bisect_tol, lo, hi)
    m, _ = _polish_and_grad(p, r, state, gamma, m, want_grad=False)
    return float(m[0])


def whittle_gradient(
    transitions: np.ndarray,
    rewards: np.ndarray,
    state: int,
    gamma: float,
    index: float | None = None,
) -> np.ndarray:
    """d index(state) / d rewards, length-M vector.

    Freezes the optimal policy at the index, writes the index as an affine
    (in fact linear) function of the rewards through the indifference
    condition, and differentiates by solving one (M+1)-sized linear system.
    """
    _check_gamma(gamma)
    p = np.asarray(transitions, dtype=float)[None]
    r = np.asarray(rewards, dtype=float)[None]
    if index is None:
        m = _bisect_indices(p, r, state, gamma, BISECT_TOL)
    else:
        m = np.array([float(index)])
    _, grad = _polish_and_grad(p, r, state, gamma, m, want_grad=True)
    return grad[0]


def whittle_table(
    transitions: np.ndarray,
    rewards: np.ndarray,
    gamma: float,
    bisect_tol: float = BISECT_TOL,
    with_gradients: bool = False,
):
    """Indices of every (arm, state); optionally gradients d W[i,u] / d R[i,:].

    transitions: (N, M, 2, M); rewards: (N, M).  Returns W with shape (N, M)
    and, when requested, G with shape (N, M, M) where G[i, u] is the gradient
    of W[i, u] with respect to arm i's reward vector.
    """
    _check_gamma(gamma)
    p = np.asarray(transitions, dtype=float)
    r = np.asarray(rewards, dtype=float)
    n, m_states = r.shape
    w = np.empty((n, m_states))
    g = np.empty((n, m_states, m_states)) if with_gradients else None
    for u in range(m_states):
        m_bis = _bisect_indices(p, r, u, gamma, bisect_tol)
        m_u, grad = _polish_and_grad(p, r, u, gamma, m_bis, want_grad=with_gradients)
        w[:, u] = m_u
        if with_gradients:
            g[:, u, :] = grad
    return (w, g) if with_gradients else w


def check_indexability(
    transitions: np.ndarray,
    rewards: np.ndarray,
    state: int,
    gamma: float,
    n_grid: int = 64,
) -> bool:
    """Debug probe: sample the Q-gap on a subsidy grid and warn if it is
    not monotone non-increasing.  Indexability is otherwise assumed."""
    _check_gamma(gamma)
    p = np.asarray(transitions, dtype=float)
    r = np.asarray(rewards, dtype=float)
    span = float(np.max(np.abs(r))) / (1.0 - gamma) + 1.0
    grid = np.linspace(-span, span, n_grid)
    gaps = _gap_batch(
        np.repeat(p[None], n_grid, axis=0), np.repeat(r[None], n_grid, axis=0), grid, state, gamma
    )
    monotone = bool(np.all(np.diff(gaps) <= 1e-9))
    if not monotone:
        warnings.warn(
            f"Q-gap for state {state} is not monotone in the subsidy; "
            "the arm may not be indexable",
            RuntimeWarning,
            stacklevel=2,
        )
    return monotone


def _check_gamma(gamma: float) -> None:
    if not 0.0 <= gamma < 1.0:
        raise ParameterError(f"index computation requires 0 <= gamma < 1, got {gamma}")
