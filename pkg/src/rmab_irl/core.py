"""Domain types for restless-bandit instances.

Conventions used throughout the package:

* states are integers ``0..M-1``, ordered by "goodness" ascending.  For the
  binary listening model state 0 = not listened, state 1 = listened.  For
  history states (M = 2**T) the least-significant bit is the most recent
  week, so odd state indices are "currently listening".
* actions are 0 (passive) and 1 (active); at most K arms are active per step.
* timesteps are 0-based, ``0..H-1``, in memory and in every file format.
* transition tensors have shape ``(N, M, 2, M)`` indexed ``P[i, s, a, s']``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FeatureError, IngestionError, ParameterError, ValidationError

ROW_SUM_TOL = 1e-9
LOAD_ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class FeatureTable:
    """Static per-arm feature records.

    ``records[i]`` is the feature dict of arm ``i``.  All records carry the
    same feature names.  ``risk_thresholds`` holds the cutoffs used by the
    risk score (keys ``education_thr`` and ``income_thr``); when absent,
    consumers fall back to population medians.
    """

    records: tuple[dict, ...]
    risk_thresholds: dict | None = None

    def __post_init__(self):
        if not self.records:
            raise ValidationError("feature table must contain at least one record")
        names = frozenset(self.records[0])
        for i, rec in enumerate(self.records):
            if frozenset(rec) != names:
                raise ValidationError(f"feature record {i} does not match declared names {sorted(names)}")

    @property
    def n_arms(self) -> int:
        return len(self.records)

    @property
    def feature_names(self) -> frozenset[str]:
        return frozenset(self.records[0])

    def column(self, name: str) -> list:
        if name not in self.records[0]:
            raise FeatureError(name)
        return [rec[name] for rec in self.records]


@dataclass(frozen=True)
class RmabInstance:
    """A restless bandit: N independent arms, per-step action budget K.

    ``transitions[i, s, a, s']`` is arm i's probability of moving to s' from
    s under action a.  Rows are validated and renormalised to sum to one at
    construction; instances are immutable afterwards and safe to share.
    """

    n_arms: int
    n_states: int
    budget: int
    horizon: int
    discount: float
    transitions: np.ndarray
    features: FeatureTable | None = None

    def __post_init__(self):
        if self.n_arms < 1 or self.n_states < 2:
            raise ParameterError(f"need n_arms >= 1 and n_states >= 2, got {self.n_arms}, {self.n_states}")
        if not 0 < self.budget <= self.n_arms:
            raise ParameterError(f"budget must satisfy 0 < K <= N, got K={self.budget}, N={self.n_arms}")
        if self.horizon < 1:
            raise ParameterError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 <= self.discount <= 1.0:
            raise ParameterError(f"discount must be in [0, 1], got {self.discount}")

        p = np.asarray(self.transitions, dtype=float)
        expected = (self.n_arms, self.n_states, 2, self.n_states)
        if p.shape != expected:
            raise ValidationError(f"transition tensor shape {p.shape} != {expected}")
        if np.any(p < -1e-12) or np.any(p > 1 + 1e-12):
            raise ValidationError("transition probabilities must lie in [0, 1]")
        sums = p.sum(axis=3)
        bad = np.argwhere(np.abs(sums - 1.0) > LOAD_ROW_SUM_TOL)
        if bad.size:
            i, s, a = bad[0]
            raise ValidationError(
                f"transition row arm={i} state={s} action={a} sums to {sums[i, s, a]:.6g}, expected 1"
            )
        p = np.clip(p, 0.0, 1.0)
        p /= p.sum(axis=3, keepdims=True)
        p.setflags(write=False)
        object.__setattr__(self, "transitions", p)

        if self.features is not None and self.features.n_arms != self.n_arms:
            raise ValidationError(
                f"feature table has {self.features.n_arms} records for {self.n_arms} arms"
            )

    def arm(self, i: int) -> np.ndarray:
        """Transition tensor of a single arm, shape (M, 2, M)."""
        return self.transitions[i]


@dataclass(frozen=True)
class Trajectory:
    """Joint states and budget-feasible joint actions over a horizon.

    ``states[h, i]`` and ``actions[h, i]`` give arm i's state and action at
    timestep h.  The per-step action count never exceeds the budget under
    which the trajectory was produced.
    """

    states: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states, dtype=np.int64)
        a = np.asarray(self.actions, dtype=np.int64)
        if s.ndim != 2 or a.shape != s.shape:
            raise ValidationError(f"states/actions must be (H, N) arrays, got {s.shape} and {a.shape}")
        if np.any(s < 0):
            raise ValidationError("state indices must be non-negative")
        if not np.isin(a, (0, 1)).all():
            raise ValidationError("actions must be 0 or 1")
        s.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "actions", a)

    @property
    def horizon(self) -> int:
        return self.states.shape[0]

    @property
    def n_arms(self) -> int:
        return self.states.shape[1]

    def check_feasible(self, instance: RmabInstance) -> None:
        if self.n_arms != instance.n_arms:
            raise ValidationError(f"trajectory has {self.n_arms} arms, instance has {instance.n_arms}")
        if np.any(self.states >= instance.n_states):
            raise ValidationError("trajectory contains a state index >= n_states")
        per_step = self.actions.sum(axis=1)
        if np.any(per_step > instance.budget):
            h = int(np.argmax(per_step > instance.budget))
            raise ValidationError(
                f"timestep {h} uses {per_step[h]} actions, budget is {instance.budget}"
            )


def check_rewards(instance: RmabInstance, rewards: np.ndarray) -> np.ndarray:
    """Validate an (N, M) reward matrix against an instance and return it as float."""
    r = np.asarray(rewards, dtype=float)
    if r.shape != (instance.n_arms, instance.n_states):
        raise ValidationError(
            f"reward matrix shape {r.shape} != ({instance.n_arms}, {instance.n_states})"
        )
    if not np.isfinite(r).all():
        raise ValidationError("reward matrix contains non-finite entries")
    return r


# ---------------------------------------------------------------------------
# synthetic generation


def synth_transitions(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """Random row-stochastic tensors where acting is strictly better.

    The passive row is Dirichlet; the active row mixes it with a point mass
    on the best state, which pushes the active CDF below the passive CDF at
    every state (strictly somewhere), i.e. stochastic dominance toward
    higher-index states.  For M=2 this reduces to P[s,1,1] > P[s,0,1].
    """
    passive = rng.dirichlet(np.ones(m), size=(n, m))
    # keep some mass off the top state so the dominance stays strict
    passive = 0.9 * passive + 0.1 / m
    lift = rng.uniform(0.05, 0.35, size=(n, m, 1))
    top = np.zeros(m)
    top[m - 1] = 1.0
    active = (1.0 - lift) * passive + lift * top
    p = np.stack([passive, active], axis=2)
    return p / p.sum(axis=3, keepdims=True)


LANGUAGES = ("hindi", "marathi", "gujarati", "bengali")


def synth_features(n: int, rng: np.random.Generator) -> FeatureTable:
    """MCH-like synthetic feature table with median risk thresholds.

    Marginals are independent per feature; they exist only to drive
    predicates and risk scores, not to mimic any real population.
    """
    income = np.round(rng.lognormal(mean=9.2, sigma=0.7, size=n)).astype(int)
    education = rng.integers(0, 7, size=n)
    phone = rng.random(n) < 0.6
    language = rng.choice(LANGUAGES, size=n, p=(0.4, 0.3, 0.2, 0.1))
    gestation = rng.integers(4, 40, size=n)
    records = tuple(
        {
            "income": int(income[i]),
            "education_level": int(education[i]),
            "phone_ownership": bool(phone[i]),
            "language": str(language[i]),
            "gestational_age": int(gestation[i]),
        }
        for i in range(n)
    )
    thresholds = {
        "education_thr": float(np.median(education)),
        "income_thr": float(np.median(income)),
    }
    return FeatureTable(records=records, risk_thresholds=thresholds)


def synth_instance(
    n: int,
    m: int,
    k: int,
    h: int,
    gamma: float,
    seed: int,
    with_features: bool = True,
) -> RmabInstance:
    """Random instance where the active action strictly dominates the passive one.

    Deterministic given ``seed``.
    """
    if n < 2 or m < 2:
        raise ParameterError(f"need n >= 2 and m >= 2, got n={n}, m={m}")
    if not 0 < k <= n:
        raise ParameterError(f"budget must satisfy 0 < k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    transitions = synth_transitions(n, m, rng)
    features = synth_features(n, rng) if with_features else None
    return RmabInstance(
        n_arms=n,
        n_states=m,
        budget=k,
        horizon=h,
        discount=gamma,
        transitions=transitions,
        features=features,
    )


# ---------------------------------------------------------------------------
# transition estimation from listening logs


def estimate_transitions(raw, n_states: int, smoothing: float = 1.0) -> np.ndarray:
    """Per-arm empirical transition estimates with Laplace smoothing.

    ``raw`` is an iterable of ``(arm, timestep, state, action)`` tuples with
    consecutive timesteps per arm.  Counts come from consecutive pairs:
    (s_h, a_h) -> s_{h+1}.  Rows with no observations and no smoothing fall
    back to uniform.
    """
    if smoothing < 0:
        raise ParameterError(f"smoothing must be >= 0, got {smoothing}")
    by_arm: dict[int, list[tuple[int, int, int]]] = {}
    for arm, h, s, a in raw:
        if not 0 <= s < n_states:
            raise IngestionError(f"state {s} out of range for arm {arm}")
        by_arm.setdefault(int(arm), []).append((int(h), int(s), int(a)))
    if not by_arm:
        raise IngestionError("empty listening log")
    arms = sorted(by_arm)
    if arms != list(range(len(arms))):
        raise IngestionError(f"arm ids must be contiguous from 0, got {arms[:5]}...")

    n = len(arms)
    counts = np.zeros((n, n_states, 2, n_states))
    for i in arms:
        rows = sorted(by_arm[i])
        steps = [h for h, _, _ in rows]
        if steps != list(range(steps[0], steps[0] + len(steps))):
            raise IngestionError(f"arm {i} has non-consecutive timesteps {steps}")
        for (h0, s0, a0), (_, s1, _) in zip(rows, rows[1:]):
            counts[i, s0, a0, s1] += 1

    totals = counts.sum(axis=3, keepdims=True)
    p = np.empty_like(counts)
    if smoothing > 0:
        p = (counts + smoothing) / (totals + n_states * smoothing)
    else:
        with np.errstate(invalid="ignore"):
            p = counts / totals
        p[np.broadcast_to(totals == 0, p.shape)] = 1.0 / n_states
    return p


# ---------------------------------------------------------------------------
# risk scores

RISK_FEATURES = ("education_level", "income", "phone_ownership")


def risk_score(record: dict, thresholds: dict) -> int:
    """Count of socioeconomic risk indicators, 0..3.

    One point each for education below threshold, income below threshold,
    and not owning a phone.
    """
    for name in RISK_FEATURES:
        if name not in record:
            raise FeatureError(name)
    return int(
        (record["education_level"] < thresholds["education_thr"])
        + (record["income"] < thresholds["income_thr"])
        + (record["phone_ownership"] is False or record["phone_ownership"] == 0)
    )


def default_risk_thresholds(features: FeatureTable) -> dict:
    """Risk cutoffs attached to the table, else population medians."""
    if features.risk_thresholds is not None:
        return features.risk_thresholds
    return {
        "education_thr": float(np.median(features.column("education_level"))),
        "income_thr": float(np.median(features.column("income"))),
    }


def risk_scores(features: FeatureTable, thresholds: dict | None = None) -> np.ndarray:
    """Vector of risk scores for every arm."""
    thr = thresholds if thresholds is not None else default_risk_thresholds(features)
    return np.array([risk_score(rec, thr) for rec in features.records], dtype=np.int64)
