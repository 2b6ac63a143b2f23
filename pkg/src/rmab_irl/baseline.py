"""Joint-MDP maximum-entropy IRL baseline for tiny instances.

Flattens the N-arm bandit into one MDP over M**N joint states whose actions
are the exact-K subsets of arms, then runs classic max-entropy IRL with
one-hot state features.  The construction is exponential in N by design;
the size guard turns the blow-up into an explicit, reportable error, and
the runtime probe reports per-gradient-step timings for both this baseline
and the arm-wise learner.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from functools import reduce
from itertools import combinations

import numpy as np

from .core import RmabInstance, Trajectory, synth_instance
from .errors import SizeError
from .learning import TrainConfig, train
from .simulate import RolloutConfig, simulate

JOINT_STATE_CAP = 4096
JOINT_ENTRY_CAP = 1 << 25  # total transition-tensor entries


@dataclass(frozen=True)
class JointMdp:
    """The flattened bandit: joint states, exact-K joint actions.

    Joint state index encodes arm i's state as the i-th base-M digit
    (arm 0 least significant).  ``transition[a, s, s']`` is the product of
    the per-arm transition probabilities under joint action ``actions[a]``.
    """

    n_arms: int
    n_states_per_arm: int
    budget: int
    discount: float
    actions: tuple[tuple[int, ...], ...]
    transition: np.ndarray  # (A, S, S)

    @property
    def n_joint_states(self) -> int:
        return self.n_states_per_arm**self.n_arms

    def encode(self, states: np.ndarray) -> int:
        return int(np.dot(states, self.n_states_per_arm ** np.arange(self.n_arms)))

    def decode(self, index: int) -> np.ndarray:
        digits = np.empty(self.n_arms, dtype=np.int64)
        for i in range(self.n_arms):
            digits[i] = index % self.n_states_per_arm
            index //= self.n_states_per_arm
        return digits

    def encode_action(self, action_row: np.ndarray) -> int:
        subset = tuple(np.flatnonzero(action_row))
        return self.actions.index(subset)


def build_joint_mdp(
    instance: RmabInstance,
    cap: int = JOINT_STATE_CAP,
    entry_cap: int = JOINT_ENTRY_CAP,
) -> JointMdp:
    """Materialise the joint MDP, or fail loudly when it would not fit.

    Exceeding the cap is the expected outcome for more than a handful of
    arms and is itself the datum the scaling comparison reports.
    """
    n, m = instance.n_arms, instance.n_states
    n_joint = m**n
    if n_joint >= cap:
        raise SizeError(f"joint state space {m}^{n} = {n_joint} reaches the cap {cap}")
    actions = tuple(combinations(range(n), instance.budget))
    total_entries = len(actions) * n_joint * n_joint
    if total_entries > entry_cap:
        raise SizeError(
            f"joint transition tensor needs {total_entries} entries "
            f"({len(actions)} actions x {n_joint}^2 states), cap is {entry_cap}"
        )

    transition = np.empty((len(actions), n_joint, n_joint))
    for a_idx, subset in enumerate(actions):
        per_arm = [
            instance.transitions[i, :, 1 if i in subset else 0, :] for i in range(n)
        ]
        # kron(last, ..., first) keeps arm 0 as the least-significant digit
        transition[a_idx] = reduce(np.kron, reversed(per_arm))
    return JointMdp(
        n_arms=n,
        n_states_per_arm=m,
        budget=instance.budget,
        discount=instance.discount,
        actions=actions,
        transition=transition,
    )


def _logsumexp_rows(q: np.ndarray) -> np.ndarray:
    top = q.max(axis=1, keepdims=True)
    return top[:, 0] + np.log(np.exp(q - top).sum(axis=1))


def _soft_value_iteration(joint: JointMdp, reward: np.ndarray, v0=None, tol=1e-8, max_iters=5000):
    """Soft Bellman fixed point; returns the soft policy (S, A) and values.

    ``v0`` warm-starts the iteration; the fixed point is unique for
    gamma < 1, so this only changes the iteration count.
    """
    gamma = joint.discount
    v = np.zeros(joint.n_joint_states) if v0 is None else v0.copy()
    for _ in range(max_iters):
        q = reward[:, None] + gamma * np.einsum("ast,t->sa", joint.transition, v)
        v_new = _logsumexp_rows(q)
        if np.max(np.abs(v_new - v)) < tol:
            v = v_new
            break
        v = v_new
    q = reward[:, None] + gamma * np.einsum("ast,t->sa", joint.transition, v)
    return np.exp(q - _logsumexp_rows(q)[:, None]), v


def _expected_visits(joint: JointMdp, policy: np.ndarray, start_dist: np.ndarray, horizon: int):
    """Forward-propagated state occupancy summed over `horizon` steps."""
    d = start_dist.copy()
    total = np.zeros_like(d)
    for _ in range(horizon):
        total += d
        flow = d[:, None] * policy  # (S, A)
        d = np.einsum("sa,ast->t", flow, joint.transition)
    return total


def encode_trajectories(joint: JointMdp, trajectories: list[Trajectory]):
    """Expert trajectories as joint (state, action) index sequences."""
    encoded = []
    for traj in trajectories:
        states = [joint.encode(traj.states[h]) for h in range(traj.horizon)]
        acts = [joint.encode_action(traj.actions[h]) for h in range(traj.horizon)]
        encoded.append((states, acts))
    return encoded


def maxent_irl(
    joint: JointMdp,
    expert: list[Trajectory],
    iters: int = 100,
    lr: float = 0.1,
    convergence_tol: float = 1e-3,
) -> np.ndarray:
    """Classic max-entropy IRL over the joint MDP with one-hot features.

    Gradient = empirical state-visit counts minus the soft policy's expected
    visits from the empirical start distribution over the expert horizon.
    Returns the best iterate (smallest gradient norm), warning if it never
    dropped below ``convergence_tol``.
    """
    encoded = encode_trajectories(joint, expert)
    horizon = max(len(states) for states, _ in encoded)
    n_joint = joint.n_joint_states

    empirical = np.zeros(n_joint)
    start = np.zeros(n_joint)
    for states, _ in encoded:
        start[states[0]] += 1.0
        for s in states:
            empirical[s] += 1.0
    empirical /= len(encoded)
    start /= len(encoded)

    reward = np.zeros(n_joint)
    best = reward.copy()
    best_norm = np.inf
    v = None
    for _ in range(iters):
        policy, v = _soft_value_iteration(joint, reward, v0=v)
        expected = _expected_visits(joint, policy, start, horizon)
        grad = empirical - expected
        norm = float(np.linalg.norm(grad))
        if norm < best_norm:
            best, best_norm = reward.copy(), norm
        if norm < convergence_tol:
            return reward
        reward = reward + lr * grad
    if best_norm >= convergence_tol:
        warnings.warn(
            f"max-entropy IRL gradient norm {best_norm:.3g} after {iters} iterations; "
            "returning the best iterate",
            RuntimeWarning,
            stacklevel=2,
        )
    return best


def maxent_gradient(joint: JointMdp, reward: np.ndarray, expert: list[Trajectory]) -> np.ndarray:
    """One gradient evaluation (used by tests and the runtime probe)."""
    encoded = encode_trajectories(joint, expert)
    horizon = max(len(states) for states, _ in encoded)
    empirical = np.zeros(joint.n_joint_states)
    start = np.zeros(joint.n_joint_states)
    for states, _ in encoded:
        start[states[0]] += 1.0
        for s in states:
            empirical[s] += 1.0
    empirical /= len(encoded)
    start /= len(encoded)
    policy, _ = _soft_value_iteration(joint, reward)
    return empirical - _expected_visits(joint, policy, start, horizon)


def marginal_pull_fn(joint: JointMdp, reward: np.ndarray):
    """Per-arm pull probabilities implied by the soft joint policy.

    p_i(s) sums the policy mass of every joint action containing arm i, so
    the vector sums to K and is directly comparable with soft-top-k output.
    """
    policy, _ = _soft_value_iteration(joint, reward)
    member = np.zeros((len(joint.actions), joint.n_arms))
    for a_idx, subset in enumerate(joint.actions):
        member[a_idx, list(subset)] = 1.0

    def probs(states: np.ndarray) -> np.ndarray:
        return policy[joint.encode(states)] @ member

    return probs


# ---------------------------------------------------------------------------
# runtime probe


def runtime_probe(
    n_values: list[int],
    m: int = 2,
    k: int = 1,
    horizon: int = 5,
    n_trajectories: int = 2,
    gamma: float = 0.99,
    seed: int = 0,
    steps: int = 3,
    cap: int = JOINT_STATE_CAP,
) -> list[dict]:
    """Seconds per gradient step for the arm-wise learner vs the joint
    baseline at each problem size; baseline entries past the cap are marked
    infeasible rather than timed."""
    rows = []
    for n in n_values:
        instance = synth_instance(n, m, min(k, n), horizon, gamma, seed, with_features=False)
        rng = np.random.default_rng([seed, n])
        r_true = rng.uniform(0.0, 1.0, size=(n, m))
        expert = simulate(
            instance,
            r_true,
            RolloutConfig(horizon=horizon, runs=n_trajectories, policy_mode="epsilon", seed=seed),
        )

        _, trace = train(instance, expert, TrainConfig(epochs=steps, discount=gamma, seed=seed))
        rows.append(
            {
                "method": "whittle_irl",
                "n": n,
                "seconds_per_step": float(np.mean([row["step_seconds"] for row in trace])),
                "status": "ok",
            }
        )

        try:
            joint = build_joint_mdp(instance, cap=cap)
        except SizeError:
            rows.append(
                {"method": "joint_maxent", "n": n, "seconds_per_step": float("nan"), "status": "infeasible"}
            )
            continue
        reward = np.zeros(joint.n_joint_states)
        times = []
        for _ in range(steps):
            t0 = time.perf_counter()
            grad = maxent_gradient(joint, reward, expert)
            reward = reward + 0.1 * grad
            times.append(time.perf_counter() - t0)
        rows.append(
            {
                "method": "joint_maxent",
                "n": n,
                "seconds_per_step": float(np.mean(times)),
                "status": "ok",
            }
        )
    return rows


def save_timings_csv(rows: list[dict], path) -> None:
    import csv

    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["method", "n", "seconds_per_step", "status"])
        for row in rows:
            w.writerow([row["method"], row["n"], repr(row["seconds_per_step"]), row["status"]])
