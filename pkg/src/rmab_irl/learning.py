"""Gradient-ascent reward learning against expert trajectories.

The learner scores a reward matrix by the Bernoulli log-likelihood of the
expert's actions under the soft-top-k policy over Whittle indices, and
ascends it with Adam.  The chain rule runs likelihood -> pull probabilities
-> indices -> rewards; the last factor is arm-block-sparse because arms are
independent MDPs, so one reward row only moves its own arm's indices.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .core import RmabInstance, Trajectory, check_rewards
from .errors import ParameterError, SolverError
from .softtopk import soft_top_k
from .whittle import whittle_table

PROB_FLOOR = 1e-12  # clamp applied to pull probabilities before any log


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 0.01
    epsilon: float = 0.01
    discount: float = 0.99
    seed: int = 0
    # Adam moment decays, standard defaults
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.epochs < 0:
            raise ParameterError(f"epochs must be >= 0, got {self.epochs}")
        if self.learning_rate <= 0 or self.epsilon <= 0:
            raise ParameterError("learning_rate and epsilon must be positive")
        if not 0.0 <= self.discount < 1.0:
            raise ParameterError(f"discount must be in [0, 1), got {self.discount}")


def _clamped_log_terms(p: np.ndarray, a: np.ndarray) -> float:
    q = np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return float(np.sum(a * np.log(q) + (1 - a) * np.log(1.0 - q)))


def eval_likelihood(
    instance: RmabInstance,
    rewards: np.ndarray,
    expert: list[Trajectory],
    epsilon: float,
) -> float:
    """Log-likelihood of the expert's actions under the reward-induced policy.

    For each trajectory and timestep, pull probabilities come from
    soft-top-k over the Whittle indices of the occupied states; each arm
    contributes a*log(p) + (1-a)*log(1-p).  Transition terms are constants
    in the rewards and are dropped.
    """
    r = check_rewards(instance, rewards)
    w_table = whittle_table(instance.transitions, r, instance.discount)
    return _eval_from_table(instance, w_table, expert, epsilon)


def _eval_from_table(instance, w_table, expert, epsilon) -> float:
    arms = np.arange(instance.n_arms)
    total = 0.0
    for traj in expert:
        for h in range(traj.horizon):
            w = w_table[arms, traj.states[h]]
            p = soft_top_k(w, instance.budget, epsilon)
            total += _clamped_log_terms(p, traj.actions[h])
    return total


def eval_gradient(
    instance: RmabInstance,
    rewards: np.ndarray,
    expert: list[Trajectory],
    epsilon: float,
) -> np.ndarray:
    """d eval_likelihood / d rewards, shape (N, M)."""
    r = check_rewards(instance, rewards)
    w_table, grad_table = whittle_table(
        instance.transitions, r, instance.discount, with_gradients=True
    )
    _, grad = _eval_and_grad_from_tables(instance, w_table, grad_table, expert, epsilon)
    return grad


def _eval_and_grad_from_tables(instance, w_table, grad_table, expert, epsilon):
    """Shared evaluation pass: likelihood and its reward gradient.

    The per-step gradient in index space has the closed form
        dEval/dw = s - g * sum(s) / sum(g),   s_i = g_i * dEval/dp_i,
    where g_i = p_i (1 - p_i) / eps.  Written this way it stays finite even
    when probabilities saturate; terms whose log is clamped contribute zero,
    matching the clamped objective exactly.
    """
    arms = np.arange(instance.n_arms)
    total = 0.0
    grad = np.zeros((instance.n_arms, instance.n_states))
    for traj in expert:
        for h in range(traj.horizon):
            states_h = traj.states[h]
            a = traj.actions[h]
            w = w_table[arms, states_h]
            p = soft_top_k(w, instance.budget, epsilon)
            total += _clamped_log_terms(p, a)

            live_lo = p >= PROB_FLOOR
            live_hi = p <= 1.0 - PROB_FLOOR
            s = (a * (1.0 - p) * live_lo - (1 - a) * p * live_hi) / epsilon
            g = p * (1.0 - p) / epsilon
            g_total = g.sum()
            d_eval_dw = s - g * (s.sum() / g_total) if g_total > 0 else np.zeros_like(s)

            grad += d_eval_dw[:, None] * grad_table[arms, states_h, :]
    return total, grad


@dataclass
class _AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    def step(self, grad: np.ndarray, lr: float, b1: float, b2: float, eps: float) -> np.ndarray:
        self.t += 1
        self.m = b1 * self.m + (1 - b1) * grad
        self.v = b2 * self.v + (1 - b2) * grad * grad
        m_hat = self.m / (1 - b1**self.t)
        v_hat = self.v / (1 - b2**self.t)
        return lr * m_hat / (np.sqrt(v_hat) + eps)


def train(
    instance: RmabInstance,
    expert: list[Trajectory],
    cfg: TrainConfig = TrainConfig(),
) -> tuple[np.ndarray, list[dict]]:
    """Learn a reward matrix by full-batch gradient ascent.

    Rewards start at zero.  Each epoch recomputes the Whittle index and
    gradient tables from scratch, evaluates the likelihood of the expert
    set, and takes one Adam ascent step.  Returns the final rewards and a
    per-epoch trace (eval, gradient norm, wall-clock seconds).
    """
    if not expert:
        raise ParameterError("expert trajectory set must be non-empty")
    for traj in expert:
        traj.check_feasible(instance)

    rewards = np.zeros((instance.n_arms, instance.n_states))
    adam = _AdamState(m=np.zeros_like(rewards), v=np.zeros_like(rewards))
    trace: list[dict] = []
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        w_table, grad_table = whittle_table(
            instance.transitions, rewards, cfg.discount, with_gradients=True
        )
        value, grad = _eval_and_grad_from_tables(instance, w_table, grad_table, expert, cfg.epsilon)
        if not (np.isfinite(value) and np.isfinite(grad).all()):
            raise SolverError(f"training aborted: non-finite eval or gradient at epoch {epoch}")
        rewards = rewards + adam.step(grad, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps)
        trace.append(
            {
                "epoch": epoch,
                "eval": value,
                "grad_norm": float(np.linalg.norm(grad)),
                "step_seconds": time.perf_counter() - t0,
            }
        )
    return rewards, trace


def center_rewards(rewards: np.ndarray) -> np.ndarray:
    """Per-arm mean-centred copy, for display.

    Adding a constant to one arm's rewards never changes its indices, so
    the raw matrix carries an arbitrary per-arm offset; centring removes it
    for side-by-side comparison.
    """
    r = np.asarray(rewards, dtype=float)
    return r - r.mean(axis=1, keepdims=True)
