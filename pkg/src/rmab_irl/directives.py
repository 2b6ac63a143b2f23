"""Aggregate directives: "move interventions from category A to category B".

A directive pairs a source predicate (who can lose an action), a target
predicate (who can gain one) and an optional per-timestep move cap.  The
editor rewrites an observed trajectory so the aggregate behavior matches the
directive while preserving the per-step action count: at every timestep it
matches a uniformly random subset of acted source arms to un-acted target
arms, which makes every matching of equal size equally likely.

Predicates are JSON trees; see ``validate_predicate`` for the node grammar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FeatureTable, Trajectory, default_risk_thresholds, risk_score
from .errors import FeatureError, ParameterError, ValidationError

COMPARISONS = {
    "lt": lambda x, v: x < v,
    "le": lambda x, v: x <= v,
    "eq": lambda x, v: x == v,
    "ge": lambda x, v: x >= v,
    "gt": lambda x, v: x > v,
    "in": lambda x, v: x in v,
}

DERIVED_QUANTITIES = ("risk_score", "transition_gap")


def validate_predicate(tree, features: FeatureTable | None, n_states: int, path: str = "$") -> None:
    """Structural check of a predicate tree; raises with the offending path.

    Nodes: {"and": [...]}, {"or": [...]}, {"not": ...},
    {"feature": name, "op": lt|le|eq|ge|gt|in, "value": ...},
    {"state_in": [...]}, {"time_in": [h1, h2]},
    {"derived": "risk_score"|"transition_gap", "op": ..., "value": ...}.
    """
    if not isinstance(tree, dict) or len(tree) == 0:
        raise ValidationError(f"{path}: predicate node must be a non-empty object")
    if "and" in tree or "or" in tree:
        key = "and" if "and" in tree else "or"
        children = tree[key]
        if not isinstance(children, list) or not children:
            raise ValidationError(f"{path}.{key}: expected a non-empty list of predicates")
        for idx, child in enumerate(children):
            validate_predicate(child, features, n_states, f"{path}.{key}[{idx}]")
    elif "not" in tree:
        validate_predicate(tree["not"], features, n_states, f"{path}.not")
    elif "feature" in tree:
        name = tree["feature"]
        if features is not None and name not in features.feature_names:
            raise FeatureError(f"{path}: unknown feature {name!r}")
        _check_op(tree, path)
    elif "state_in" in tree:
        states = tree["state_in"]
        if not isinstance(states, list) or not all(
            isinstance(s, int) and 0 <= s < n_states for s in states
        ):
            raise ValidationError(f"{path}.state_in: states must be integers in [0, {n_states})")
    elif "time_in" in tree:
        window = tree["time_in"]
        if not (isinstance(window, list) and len(window) == 2):
            raise ValidationError(f"{path}.time_in: expected [h1, h2]")
    elif "derived" in tree:
        if tree["derived"] not in DERIVED_QUANTITIES:
            raise ValidationError(f"{path}.derived: unknown quantity {tree['derived']!r}")
        _check_op(tree, path)
    else:
        raise ValidationError(f"{path}: unrecognised predicate node {sorted(tree)}")


def _check_op(tree, path: str) -> None:
    op = tree.get("op")
    if op not in COMPARISONS:
        raise ValidationError(f"{path}.op: expected one of {sorted(COMPARISONS)}, got {op!r}")
    if "value" not in tree:
        raise ValidationError(f"{path}: comparison node needs a value")
    if op == "in" and not isinstance(tree["value"], list):
        raise ValidationError(f"{path}.value: op 'in' needs a list")


def eval_predicate(
    tree,
    arm: int,
    h: int,
    traj: Trajectory,
    features: FeatureTable | None,
    transitions: np.ndarray,
    risk_thresholds: dict | None = None,
) -> bool:
    """Evaluate a predicate for one arm at one timestep.  Pure."""
    if "and" in tree:
        return all(
            eval_predicate(c, arm, h, traj, features, transitions, risk_thresholds)
            for c in tree["and"]
        )
    if "or" in tree:
        return any(
            eval_predicate(c, arm, h, traj, features, transitions, risk_thresholds)
            for c in tree["or"]
        )
    if "not" in tree:
        return not eval_predicate(tree["not"], arm, h, traj, features, transitions, risk_thresholds)
    if "feature" in tree:
        if features is None or tree["feature"] not in features.feature_names:
            raise FeatureError(tree["feature"])
        value = features.records[arm][tree["feature"]]
        return bool(COMPARISONS[tree["op"]](value, tree["value"]))
    if "state_in" in tree:
        return int(traj.states[h, arm]) in tree["state_in"]
    if "time_in" in tree:
        h1, h2 = tree["time_in"]
        return h1 <= h <= h2
    if "derived" in tree:
        if tree["derived"] == "risk_score":
            if features is None:
                raise FeatureError("risk_score needs a feature table")
            thr = risk_thresholds or default_risk_thresholds(features)
            value = risk_score(features.records[arm], thr)
        else:  # transition_gap: benefit of acting in the worst state
            value = float(transitions[arm, 0, 1, 1] - transitions[arm, 0, 0, 1])
        return bool(COMPARISONS[tree["op"]](value, tree["value"]))
    raise ValidationError(f"unrecognised predicate node {sorted(tree)}")


@dataclass(frozen=True)
class Directive:
    """Move actions from arms matching ``source`` to arms matching ``target``."""

    source: dict
    target: dict
    max_moves_per_timestep: int | None = None

    def __post_init__(self):
        if self.max_moves_per_timestep is not None and self.max_moves_per_timestep < 1:
            raise ParameterError("max_moves_per_timestep must be >= 1 when finite")

    def validate(self, features: FeatureTable | None, n_states: int) -> None:
        validate_predicate(self.source, features, n_states, "$.source")
        validate_predicate(self.target, features, n_states, "$.target")

    def to_json(self) -> str:
        doc = {"source": self.source, "target": self.target, "cap": self.max_moves_per_timestep}
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Directive":
        doc = json.loads(text)
        if not isinstance(doc, dict) or "source" not in doc or "target" not in doc:
            raise ValidationError("directive.json must contain source and target predicates")
        return cls(source=doc["source"], target=doc["target"], max_moves_per_timestep=doc.get("cap"))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "Directive":
        return cls.from_json(Path(path).read_text())


def apply_directive(
    traj: Trajectory,
    directive: Directive,
    features: FeatureTable | None,
    transitions: np.ndarray,
    rng: np.random.Generator,
) -> Trajectory:
    """One random edit of one trajectory realising the directive.

    Per timestep, donors are acted arms matching the source predicate and
    recipients are un-acted arms matching the target; min(|donors|,
    |recipients|, cap) moves are drawn uniformly without replacement on both
    sides.  The per-step action count is unchanged and untouched arms keep
    their bits.
    """
    actions = np.array(traj.actions, dtype=np.int64)
    cap = directive.max_moves_per_timestep
    for h in range(traj.horizon):
        donors = [
            i
            for i in range(traj.n_arms)
            if actions[h, i] == 1
            and eval_predicate(directive.source, i, h, traj, features, transitions)
        ]
        recipients = [
            i
            for i in range(traj.n_arms)
            if actions[h, i] == 0
            and eval_predicate(directive.target, i, h, traj, features, transitions)
        ]
        n_move = min(len(donors), len(recipients))
        if cap is not None:
            n_move = min(n_move, cap)
        if n_move == 0:
            continue
        moved_from = rng.choice(donors, size=n_move, replace=False)
        moved_to = rng.choice(recipients, size=n_move, replace=False)
        actions[h, moved_from] = 0
        actions[h, moved_to] = 1
    return Trajectory(states=traj.states, actions=actions)


def generate_expert_set(
    trajectories: list[Trajectory],
    directive: Directive,
    features: FeatureTable | None,
    transitions: np.ndarray,
    replicas: int,
    seed: int,
) -> list[Trajectory]:
    """Independent directive edits of every trajectory, ``replicas`` times each.

    Every (trajectory, replica) pair gets its own counter-derived RNG stream,
    so the output is deterministic given the seed and replicas never share
    randomness.  Output size is len(trajectories) * replicas.
    """
    if replicas < 1:
        raise ParameterError(f"replicas must be >= 1, got {replicas}")
    out = []
    for j, traj in enumerate(trajectories):
        for rep in range(replicas):
            rng = np.random.default_rng([seed, j, rep])
            out.append(apply_directive(traj, directive, features, transitions, rng))
    return out


def moved_action_count(before: Trajectory, after: Trajectory) -> int:
    """Number of actions that changed hands (donor side)."""
    return int(np.sum((before.actions == 1) & (after.actions == 0)))
