"""The synthetic recovery protocol used by the benchmarks and demos.

A hidden reward matrix is drawn for a random instance, expert trajectories
are sampled from the soft index policy it induces, and the learner gets only
the transitions and those trajectories.  Success is measured by the
normalised L1 distance between the expert's and the learner's soft policies
on the trajectory states.

Expert rewards are drawn uniformly on [0, reward_scale].  The scale is
deliberately large relative to the policy temperature: near-tied indices
make the expert policy statistically indistinguishable from uniform given a
handful of trajectories, which says nothing about the learner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import synth_instance
from .learning import TrainConfig, train
from .simulate import RolloutConfig, policy_l1, simulate, soft_k_l1, soft_policy_fn

REWARD_SCALE = 10.0


@dataclass(frozen=True)
class RecoveryResult:
    metric_start: float
    metric_final: float
    metric_baseline: float | None
    seconds_per_step: float

    @property
    def improved(self) -> bool:
        return self.metric_final < self.metric_start


def recovery_run(
    n: int,
    m: int,
    k: int,
    horizon: int,
    n_trajectories: int,
    seed: int,
    cfg: TrainConfig = TrainConfig(),
    reward_scale: float = REWARD_SCALE,
    with_baseline: bool = False,
    baseline_iters: int = 40,
) -> RecoveryResult:
    """One seeded recovery run; optionally also scores the joint-MDP baseline."""
    instance = synth_instance(n, m, k, horizon, cfg.discount, seed, with_features=False)
    r_true = np.random.default_rng([seed, 1]).uniform(0.0, reward_scale, size=(n, m))
    expert = simulate(
        instance,
        r_true,
        RolloutConfig(
            horizon=horizon,
            runs=n_trajectories,
            policy_mode="soft",
            epsilon=cfg.epsilon,
            seed=seed,
        ),
    )
    learned, trace = train(instance, expert, cfg)
    zero = np.zeros((n, m))
    metric_start = soft_k_l1(instance, r_true, zero, expert, cfg.epsilon)
    metric_final = soft_k_l1(instance, r_true, learned, expert, cfg.epsilon)

    metric_baseline = None
    if with_baseline:
        from .baseline import build_joint_mdp, marginal_pull_fn, maxent_irl

        joint = build_joint_mdp(instance)
        joint_reward = maxent_irl(joint, expert, iters=baseline_iters, lr=0.2)
        metric_baseline = policy_l1(
            expert,
            soft_policy_fn(instance, r_true, cfg.epsilon),
            marginal_pull_fn(joint, joint_reward),
        )
    return RecoveryResult(
        metric_start=metric_start,
        metric_final=metric_final,
        metric_baseline=metric_baseline,
        seconds_per_step=float(np.mean([row["step_seconds"] for row in trace])) if trace else 0.0,
    )
