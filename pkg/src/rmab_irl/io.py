"""File formats: instance.json, transitions.csv, features.csv, trajectory.csv,
rewards.csv, trace.csv.

CSV columns follow the documented schemas exactly; floats are written with
``repr`` so a save/load round-trip is bit-exact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import FeatureTable, RmabInstance, Trajectory, synth_features, synth_transitions
from .errors import ValidationError


def save_instance_json(instance: RmabInstance, path) -> None:
    doc = {
        "n_arms": instance.n_arms,
        "n_states": instance.n_states,
        "budget": instance.budget,
        "horizon": instance.horizon,
        "discount": instance.discount,
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def save_transitions_csv(transitions: np.ndarray, path) -> None:
    n, m, _, _ = transitions.shape
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["arm_id", "s", "a", "s_next", "prob"])
        for i in range(n):
            for s in range(m):
                for a in (0, 1):
                    for s2 in range(m):
                        w.writerow([i, s, a, s2, repr(float(transitions[i, s, a, s2]))])


def load_transitions_csv(path, n_arms: int, n_states: int) -> np.ndarray:
    p = np.zeros((n_arms, n_states, 2, n_states))
    seen = np.zeros(p.shape, dtype=bool)
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            i, s, a, s2 = (int(row[k]) for k in ("arm_id", "s", "a", "s_next"))
            try:
                p[i, s, a, s2] = float(row["prob"])
                seen[i, s, a, s2] = True
            except IndexError:
                raise ValidationError(f"transition row out of range: arm={i} s={s} a={a} s'={s2}")
    missing = np.argwhere(~seen.any(axis=3))
    if missing.size:
        i, s, a = missing[0]
        raise ValidationError(f"no transition rows for arm={i} state={s} action={a}")
    return p


def save_features_csv(features: FeatureTable, path) -> None:
    names = sorted(features.feature_names)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["arm_id", *names])
        for i, rec in enumerate(features.records):
            w.writerow([i, *(rec[n] for n in names)])


def _parse_feature(text: str):
    if text in ("True", "False"):
        return text == "True"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def load_features_csv(path, n_arms: int | None = None) -> FeatureTable:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        rows = sorted(reader, key=lambda r: int(r["arm_id"]))
    records = tuple(
        {k: _parse_feature(v) for k, v in row.items() if k != "arm_id"} for row in rows
    )
    if n_arms is not None and len(records) != n_arms:
        raise ValidationError(f"features file has {len(records)} rows for {n_arms} arms")
    return FeatureTable(records=records)


def load_instance(
    instance_json,
    transitions_csv=None,
    features_csv=None,
) -> RmabInstance:
    """Build a validated instance from the on-disk formats.

    When ``transitions_csv`` is omitted the config must carry a ``seed``;
    transitions (and, unless a features file is given, an MCH-like feature
    table) are then synthesised deterministically from it, matching what
    ``synth_instance`` produces for the same seed.
    """
    cfg = json.loads(Path(instance_json).read_text())
    n, m = int(cfg["n_arms"]), int(cfg["n_states"])
    features = None
    if transitions_csv is not None:
        transitions = load_transitions_csv(transitions_csv, n, m)
    elif "seed" in cfg and cfg["seed"] is not None:
        rng = np.random.default_rng(int(cfg["seed"]))
        transitions = synth_transitions(n, m, rng)
        if features_csv is None:
            features = synth_features(n, rng)
    else:
        raise ValidationError("instance config has no transitions file and no seed")
    if features_csv is not None:
        features = load_features_csv(features_csv, n)
    return RmabInstance(
        n_arms=n,
        n_states=m,
        budget=int(cfg["budget"]),
        horizon=int(cfg["horizon"]),
        discount=float(cfg["discount"]),
        transitions=transitions,
        features=features,
    )


def save_trajectories_csv(trajectories: list[Trajectory], path) -> None:
    """Single trajectory: arm_id,timestep,state,action.  Sets prepend traj_id."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        if len(trajectories) == 1:
            w.writerow(["arm_id", "timestep", "state", "action"])
        else:
            w.writerow(["traj_id", "arm_id", "timestep", "state", "action"])
        for j, traj in enumerate(trajectories):
            for h in range(traj.horizon):
                for i in range(traj.n_arms):
                    row = [i, h, int(traj.states[h, i]), int(traj.actions[h, i])]
                    if len(trajectories) > 1:
                        row.insert(0, j)
                    w.writerow(row)


def load_trajectories_csv(path) -> list[Trajectory]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        has_id = "traj_id" in (reader.fieldnames or ())
        cells: dict[int, dict[tuple[int, int], tuple[int, int]]] = {}
        for row in reader:
            j = int(row["traj_id"]) if has_id else 0
            key = (int(row["timestep"]), int(row["arm_id"]))
            cells.setdefault(j, {})[key] = (int(row["state"]), int(row["action"]))
    if not cells:
        raise ValidationError(f"no trajectory rows in {path}")
    out = []
    for j in sorted(cells):
        entries = cells[j]
        horizon = 1 + max(h for h, _ in entries)
        n = 1 + max(i for _, i in entries)
        if len(entries) != horizon * n:
            raise ValidationError(f"trajectory {j} is missing (timestep, arm) cells")
        states = np.zeros((horizon, n), dtype=np.int64)
        actions = np.zeros((horizon, n), dtype=np.int64)
        for (h, i), (s, a) in entries.items():
            states[h, i] = s
            actions[h, i] = a
        out.append(Trajectory(states=states, actions=actions))
    return out


def save_rewards_csv(rewards: np.ndarray, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["arm_id", "state", "reward"])
        for i in range(rewards.shape[0]):
            for s in range(rewards.shape[1]):
                w.writerow([i, s, repr(float(rewards[i, s]))])


def load_rewards_csv(path) -> np.ndarray:
    entries = {}
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            entries[(int(row["arm_id"]), int(row["state"]))] = float(row["reward"])
    if not entries:
        raise ValidationError(f"no reward rows in {path}")
    n = 1 + max(i for i, _ in entries)
    m = 1 + max(s for _, s in entries)
    r = np.zeros((n, m))
    for (i, s), v in entries.items():
        r[i, s] = v
    return r


def save_trace_csv(trace: list[dict], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["epoch", "eval", "grad_norm", "step_seconds"])
        for row in trace:
            w.writerow([row["epoch"], repr(row["eval"]), repr(row["grad_norm"]), repr(row["step_seconds"])])
