"""Independent oracles shared by the test modules.

These deliberately avoid the library's solution paths: the index oracle is a
grid search over subsidies with plain value iteration, and gradient oracles
are central finite differences.
"""

import numpy as np

from rmab_irl.whittle import subsidy_q_values


def grid_search_index(transitions, rewards, state, gamma, lo, hi, resolution=1e-6, vi_tol=1e-10):
    """Subsidy minimising |Q(u,0) - Q(u,1)| on a uniform grid.

    Coarse-to-fine refinement keeps the oracle tractable at 1e-6 resolution.
    """
    span = hi - lo
    center = None
    for step in (span / 200, span / 2e4):
        grid = np.arange(lo, hi + step / 2, step) if center is None else np.arange(
            center - 150 * step, center + 150 * step, step
        )
        gaps = [
            abs(
                subsidy_q_values(transitions, rewards, m, gamma, tol=vi_tol).q[state, 0]
                - subsidy_q_values(transitions, rewards, m, gamma, tol=vi_tol).q[state, 1]
            )
            for m in grid
        ]
        center = float(grid[int(np.argmin(gaps))])
    step = resolution
    grid = np.arange(center - 3e-4, center + 3e-4, step)
    gaps = [
        abs(
            subsidy_q_values(transitions, rewards, m, gamma, tol=vi_tol).q[state, 0]
            - subsidy_q_values(transitions, rewards, m, gamma, tol=vi_tol).q[state, 1]
        )
        for m in grid
    ]
    return float(grid[int(np.argmin(gaps))])


def central_difference(fn, x, step=1e-5):
    """Central finite-difference gradient of a scalar function of a vector/matrix."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        e = np.zeros_like(x)
        e[idx] = step
        grad[idx] = (fn(x + e) - fn(x - e)) / (2 * step)
    return grad


def max_relative_error(analytic, reference, floor=1e-8):
    """Componentwise |a - r| / (floor/rtol-style denominator).

    ``floor`` acts as the absolute tolerance: components below it on both
    sides compare as equal.
    """
    analytic = np.asarray(analytic, dtype=float)
    reference = np.asarray(reference, dtype=float)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(reference)), floor)
    return float(np.max(np.abs(analytic - reference) / denom))


def deterministic_arm():
    """2-state arm: acting moves 0 -> 1, state 1 is absorbing, passive holds."""
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = 1.0
    p[0, 1, 1] = 1.0
    p[1, 0, 1] = 1.0
    p[1, 1, 1] = 1.0
    return p


def random_arm(rng, m):
    """Row-stochastic single-arm tensor (M, 2, M) with an active-action lift."""
    passive = rng.dirichlet(np.ones(m), size=m)
    lift = rng.uniform(0.05, 0.35, size=(m, 1))
    top = np.zeros(m)
    top[m - 1] = 1.0
    active = (1 - lift) * passive + lift * top
    return np.stack([passive, active], axis=1)
