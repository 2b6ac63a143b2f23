"""Forward rollouts under a reward-induced index policy, the policy-distance
metric, and what-if comparisons between two reward matrices.

Rollouts always act on exactly K arms per step: the hard top-k of the
current Whittle indices, optionally replaced (with small probability) by a
uniformly random K-subset.  What-if comparisons reuse common random numbers
across the two reward matrices so deltas are low-variance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import FeatureTable, RmabInstance, Trajectory, check_rewards, risk_scores
from .directives import eval_predicate
from .errors import ParameterError, ValidationError
from .softtopk import soft_top_k
from .whittle import whittle_table


@dataclass(frozen=True)
class RolloutConfig:
    """Rollout policy modes:

    * ``hard``: always act on the K highest indices.
    * ``epsilon``: hard top-k, but with probability epsilon the step uses a
      uniformly random K-subset instead (the default for what-if rollouts).
    * ``soft``: sample an exact-K subset whose inclusion probabilities are
      the soft-top-k probabilities at temperature epsilon (systematic
      sampling), i.e. draw actions from the soft policy itself.
    """

    horizon: int
    runs: int = 1
    policy_mode: str = "epsilon"
    epsilon: float = 0.01
    seed: int = 0
    initial_states: np.ndarray | None = None

    def __post_init__(self):
        if self.runs < 1 or self.horizon < 1:
            raise ParameterError("runs and horizon must be >= 1")
        if self.policy_mode not in ("hard", "epsilon", "soft"):
            raise ParameterError(f"unknown policy_mode {self.policy_mode!r}")


def listening_states(n_states: int) -> np.ndarray:
    """States that count as "currently listening".

    For history encodings (M a power of two) the least-significant bit is
    the most recent week, so odd indices listen; otherwise every state above
    the worst one counts.
    """
    if n_states & (n_states - 1) == 0:
        return np.arange(1, n_states, 2)
    return np.arange(1, n_states)


def _top_k(w: np.ndarray, k: int) -> np.ndarray:
    order = np.lexsort((np.arange(w.size), -w))
    return order[:k]


def _systematic_sample(p: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Exact-K subset with inclusion probabilities ``p`` (which sum to K).

    Systematic (Madow) sampling: lay the probabilities end to end and pick
    the intervals hit by K equally spaced points with a random offset.
    """
    cum = np.concatenate([[0.0], np.cumsum(p)])
    points = rng.random() + np.arange(k)
    chosen = np.unique(np.clip(np.searchsorted(cum, points, side="right") - 1, 0, p.size - 1))
    if chosen.size < k:  # boundary collision, measure zero: top up by probability
        rest = np.setdiff1d(np.argsort(-p, kind="stable"), chosen, assume_unique=False)
        chosen = np.concatenate([chosen, rest[: k - chosen.size]])
    return chosen


def simulate(
    instance: RmabInstance,
    rewards: np.ndarray,
    cfg: RolloutConfig,
) -> list[Trajectory]:
    """One trajectory per run under the index policy for ``rewards``.

    Transition draws come from a per-(run, timestep, arm) uniform stream
    that does not depend on the rewards, so two calls with the same seed
    and different reward matrices share their randomness.
    """
    r = check_rewards(instance, rewards)
    w_table = whittle_table(instance.transitions, r, instance.discount)
    n, k = instance.n_arms, instance.budget
    arms = np.arange(n)
    out = []
    for run in range(cfg.runs):
        u_trans = np.random.default_rng([cfg.seed, run, 0]).random((cfg.horizon, n))
        rng_policy = np.random.default_rng([cfg.seed, run, 1])
        if cfg.initial_states is not None:
            s = np.array(cfg.initial_states, dtype=np.int64)
            if s.shape != (n,):
                raise ParameterError(f"initial_states must have shape ({n},)")
        else:
            s = np.random.default_rng([cfg.seed, run, 2]).integers(0, instance.n_states, size=n)

        states = np.empty((cfg.horizon, n), dtype=np.int64)
        actions = np.zeros((cfg.horizon, n), dtype=np.int64)
        for h in range(cfg.horizon):
            states[h] = s
            if cfg.policy_mode == "soft":
                p = soft_top_k(w_table[arms, s], k, cfg.epsilon)
                chosen = _systematic_sample(p, k, rng_policy)
            elif cfg.policy_mode == "epsilon" and rng_policy.random() < cfg.epsilon:
                chosen = rng_policy.choice(n, size=k, replace=False)
            else:
                chosen = _top_k(w_table[arms, s], k)
            actions[h, chosen] = 1

            rows = instance.transitions[arms, s, actions[h]]
            cdf = np.cumsum(rows, axis=1)
            s = np.minimum((cdf < u_trans[h][:, None]).sum(axis=1), instance.n_states - 1)
        out.append(Trajectory(states=states, actions=actions))
    return out


# ---------------------------------------------------------------------------
# policy distance


def policy_l1(
    trajectories: list[Trajectory],
    probs_a,
    probs_b,
) -> float:
    """Mean per-arm L1 gap between two pull-probability maps over states.

    ``probs_a`` and ``probs_b`` map a joint state vector to pull
    probabilities.  Normalised by N * J * H.
    """
    total = 0.0
    steps = 0
    n = trajectories[0].n_arms
    for traj in trajectories:
        for h in range(traj.horizon):
            total += float(np.abs(probs_a(traj.states[h]) - probs_b(traj.states[h])).sum())
            steps += 1
    return total / (n * steps)


def soft_policy_fn(instance: RmabInstance, rewards: np.ndarray, epsilon: float):
    """Soft-top-k pull probabilities as a function of the joint state."""
    r = check_rewards(instance, rewards)
    w_table = whittle_table(instance.transitions, r, instance.discount)
    arms = np.arange(instance.n_arms)

    def probs(states: np.ndarray) -> np.ndarray:
        return soft_top_k(w_table[arms, states], instance.budget, epsilon)

    return probs


def soft_k_l1(
    instance: RmabInstance,
    r_expert: np.ndarray,
    r_learned: np.ndarray,
    trajectories: list[Trajectory],
    epsilon: float,
) -> float:
    """Normalised L1 distance between the two reward-induced soft policies,
    evaluated at the states visited by ``trajectories``."""
    return policy_l1(
        trajectories,
        soft_policy_fn(instance, r_expert, epsilon),
        soft_policy_fn(instance, r_learned, epsilon),
    )


# ---------------------------------------------------------------------------
# groupings


class Grouping:
    """Assigns every (arm, timestep) to exactly one category."""

    def __init__(self, name: str, labels: list[str], assign_fn, visits_mode: str = "listening"):
        self.name = name
        self.labels = labels
        self._assign = assign_fn
        self.visits_mode = visits_mode  # "listening" or "occupancy"

    def assign(self, traj: Trajectory, h: int) -> np.ndarray:
        cats = self._assign(traj, h)
        if np.any(cats < 0) or np.any(cats >= len(self.labels)):
            raise ValidationError(f"grouping {self.name!r} produced an out-of-range category")
        return cats

    @classmethod
    def from_spec(cls, spec, instance: RmabInstance) -> "Grouping":
        """Build from "risk", "state", a feature name, or a predicate list."""
        features = instance.features
        if spec == "risk":
            if features is None:
                raise ValidationError("risk grouping needs a feature table")
            scores = risk_scores(features)
            labels = [f"risk_{v}" for v in range(4)]
            return cls("risk", labels, lambda traj, h: scores)
        if spec == "state":
            labels = [f"state_{s}" for s in range(instance.n_states)]
            return cls("state", labels, lambda traj, h: traj.states[h], visits_mode="occupancy")
        if isinstance(spec, str):
            if features is None or spec not in features.feature_names:
                raise ValidationError(f"unknown grouping {spec!r}")
            column = features.column(spec)
            values = sorted(set(column), key=str)
            index = {v: j for j, v in enumerate(values)}
            cats = np.array([index[v] for v in column])
            labels = [f"{spec}_{v}" for v in values]
            return cls(spec, labels, lambda traj, h: cats)
        if isinstance(spec, list):
            predicates = spec

            def assign(traj: Trajectory, h: int) -> np.ndarray:
                cats = np.full(instance.n_arms, -1)
                for i in range(instance.n_arms):
                    hits = [
                        j
                        for j, pred in enumerate(predicates)
                        if eval_predicate(pred, i, h, traj, features, instance.transitions)
                    ]
                    if len(hits) != 1:
                        raise ValidationError(
                            f"grouping predicates must partition arms; arm {i} matched {len(hits)}"
                        )
                    cats[i] = hits[0]
                return cats

            labels = [f"category_{j}" for j in range(len(predicates))]
            return cls("predicates", labels, assign)
        raise ValidationError(f"unrecognised grouping spec {spec!r}")


def aggregate_stats(
    instance: RmabInstance,
    trajectories: list[Trajectory],
    groupby,
) -> dict:
    """Per-category action and visit counts, averaged over trajectories."""
    grouping = Grouping.from_spec(groupby, instance)
    n_cats = len(grouping.labels)
    listen = np.zeros(instance.n_states, dtype=bool)
    listen[listening_states(instance.n_states)] = True

    actions = np.zeros(n_cats)
    visits = np.zeros(n_cats)
    state_visits = np.zeros((n_cats, instance.n_states))
    for traj in trajectories:
        for h in range(traj.horizon):
            cats = grouping.assign(traj, h)
            s_h = traj.states[h]
            np.add.at(actions, cats, traj.actions[h])
            if grouping.visits_mode == "occupancy":
                np.add.at(visits, cats, 1)
            else:
                np.add.at(visits, cats, listen[s_h])
            np.add.at(state_visits, (cats, s_h), 1)
    runs = len(trajectories)
    return {
        "groupby": grouping.name,
        "categories": grouping.labels,
        "actions": (actions / runs).tolist(),
        "visits": (visits / runs).tolist(),
        "state_visits": (state_visits / runs).tolist(),
        "trajectories": runs,
    }


# ---------------------------------------------------------------------------
# what-if reports


@dataclass(frozen=True)
class WhatIfReport:
    groupby: str
    labels: list[str]
    actions_baseline: np.ndarray
    actions_candidate: np.ndarray
    visits_baseline: np.ndarray
    visits_candidate: np.ndarray
    state_visits_baseline: np.ndarray
    state_visits_candidate: np.ndarray
    ever_called_baseline: np.ndarray
    ever_called_candidate: np.ndarray
    runs: int
    horizon: int
    budget: int

    def to_dict(self) -> dict:
        edges = np.linspace(0.0, 1.0, 11)
        hist_b, _ = np.histogram(self.ever_called_baseline, bins=edges)
        hist_c, _ = np.histogram(self.ever_called_candidate, bins=edges)
        return {
            "groupby": self.groupby,
            "categories": [
                {
                    "name": self.labels[j],
                    "actions_baseline": float(self.actions_baseline[j]),
                    "actions_candidate": float(self.actions_candidate[j]),
                    "visits_baseline": float(self.visits_baseline[j]),
                    "visits_candidate": float(self.visits_candidate[j]),
                    "actions_delta": float(self.actions_candidate[j] - self.actions_baseline[j]),
                    "visits_delta": float(self.visits_candidate[j] - self.visits_baseline[j]),
                    "state_visits_baseline": self.state_visits_baseline[j].tolist(),
                    "state_visits_candidate": self.state_visits_candidate[j].tolist(),
                }
                for j in range(len(self.labels))
            ],
            "ever_called_histogram": {
                "bin_edges": edges.tolist(),
                "baseline": hist_b.tolist(),
                "candidate": hist_c.tolist(),
                "zero_baseline": int(np.sum(self.ever_called_baseline == 0.0)),
                "zero_candidate": int(np.sum(self.ever_called_candidate == 0.0)),
                "per_arm_baseline": self.ever_called_baseline.tolist(),
                "per_arm_candidate": self.ever_called_candidate.tolist(),
            },
            "runs": self.runs,
            "horizon": self.horizon,
            "budget": self.budget,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _aggregate_rollouts(instance, grouping, rollouts, listen):
    n_cats = len(grouping.labels)
    actions = np.zeros(n_cats)
    visits = np.zeros(n_cats)
    state_visits = np.zeros((n_cats, instance.n_states))
    called = np.zeros(instance.n_arms)
    for traj in rollouts:
        for h in range(traj.horizon):
            cats = grouping.assign(traj, h)
            s_h = traj.states[h]
            np.add.at(actions, cats, traj.actions[h])
            if grouping.visits_mode == "occupancy":
                np.add.at(visits, cats, 1)
            else:
                np.add.at(visits, cats, listen[s_h])
            np.add.at(state_visits, (cats, s_h), 1)
        called += traj.actions.any(axis=0)
    runs = len(rollouts)
    return actions / runs, visits / runs, state_visits / runs, called / runs


def whatif_report(
    instance: RmabInstance,
    r_baseline: np.ndarray,
    r_candidate: np.ndarray,
    groupby,
    cfg: RolloutConfig,
) -> WhatIfReport:
    """Simulate both reward matrices under common random numbers and compare
    per-category action counts, listenership and ever-called probabilities."""
    grouping = Grouping.from_spec(groupby, instance)
    listen = np.zeros(instance.n_states, dtype=bool)
    listen[listening_states(instance.n_states)] = True

    rollouts_b = simulate(instance, r_baseline, cfg)
    rollouts_c = simulate(instance, r_candidate, cfg)
    act_b, vis_b, sv_b, called_b = _aggregate_rollouts(instance, grouping, rollouts_b, listen)
    act_c, vis_c, sv_c, called_c = _aggregate_rollouts(instance, grouping, rollouts_c, listen)
    return WhatIfReport(
        groupby=grouping.name,
        labels=grouping.labels,
        actions_baseline=act_b,
        actions_candidate=act_c,
        visits_baseline=vis_b,
        visits_candidate=vis_c,
        state_visits_baseline=sv_b,
        state_visits_candidate=sv_c,
        ever_called_baseline=called_b,
        ever_called_candidate=called_c,
        runs=cfg.runs,
        horizon=cfg.horizon,
        budget=instance.budget,
    )


def naive_rewards(instance: RmabInstance) -> np.ndarray:
    """The homogeneous status-quo rewards: state index scaled to [0, 1]."""
    ramp = np.arange(instance.n_states) / (instance.n_states - 1)
    return np.tile(ramp, (instance.n_arms, 1))


def final_states(traj: Trajectory) -> np.ndarray:
    """Last observed joint state, the default starting point for what-ifs."""
    return np.array(traj.states[-1], dtype=np.int64)
