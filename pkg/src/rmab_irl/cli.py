"""Command-line surface mirroring the HTTP service.

Subcommands: synth, ingest, stats, edit, train, metric, whatif, bench,
serve.  Inputs and outputs are the documented file formats, every stochastic
command takes --seed, and the same inputs produce the same artifacts here
and through the service.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .baseline import runtime_probe, save_timings_csv
from .core import estimate_transitions, synth_instance
from .directives import Directive, generate_expert_set
from .errors import RmabError
from .learning import TrainConfig, center_rewards, train
from .simulate import (
    RolloutConfig,
    aggregate_stats,
    final_states,
    naive_rewards,
    simulate,
    soft_k_l1,
    whatif_report,
)


def _load_instance_dir(path: str):
    d = Path(path)
    features = d / "features.csv"
    return io.load_instance(
        d / "instance.json",
        d / "transitions.csv",
        features if features.exists() else None,
    )


def cmd_synth(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    instance = synth_instance(
        args.n, args.m, args.k, args.horizon, args.gamma, args.seed,
        with_features=not args.no_features,
    )
    io.save_instance_json(instance, out / "instance.json")
    io.save_transitions_csv(instance.transitions, out / "transitions.csv")
    if instance.features is not None:
        io.save_features_csv(instance.features, out / "features.csv")
    if args.observed_runs:
        cfg = RolloutConfig(horizon=args.horizon, runs=args.observed_runs, seed=args.seed)
        io.save_trajectories_csv(
            simulate(instance, naive_rewards(instance), cfg), out / "observed.csv"
        )
    print(f"wrote instance (N={args.n}, M={args.m}, K={args.k}) to {out}")
    return 0


def cmd_ingest(args) -> int:
    rows = []
    with open(args.log, newline="") as f:
        for row in csv.DictReader(f):
            rows.append((int(row["arm_id"]), int(row["timestep"]), int(row["state"]), int(row["action"])))
    if args.max_listen_rate is not None:
        # optional eligibility filter: drop arms that already listen this often
        by_arm: dict[int, list[int]] = {}
        for arm, _, s, _ in rows:
            by_arm.setdefault(arm, []).append(s)
        keep = {arm for arm, states in by_arm.items()
                if np.mean(np.asarray(states) > 0) <= args.max_listen_rate}
        kept = sorted(keep)
        remap = {arm: i for i, arm in enumerate(kept)}
        rows = [(remap[a], h, s, act) for a, h, s, act in rows if a in keep]
        print(f"kept {len(kept)} of {len(by_arm)} arms after listen-rate filter")
    p = estimate_transitions(rows, args.m, smoothing=args.smoothing)
    io.save_transitions_csv(p, args.out)
    print(f"wrote {p.shape[0]}-arm transition estimates to {args.out}")
    return 0


def cmd_stats(args) -> int:
    instance = _load_instance_dir(args.instance)
    trajs = io.load_trajectories_csv(args.trajectories)
    stats = aggregate_stats(instance, trajs, args.groupby)
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["category", "actions", "visits"])
            for name, a, v in zip(stats["categories"], stats["actions"], stats["visits"]):
                w.writerow([name, repr(a), repr(v)])
    for name, a, v in zip(stats["categories"], stats["actions"], stats["visits"]):
        print(f"{name}: actions={a:.2f} visits={v:.2f}")
    return 0


def cmd_edit(args) -> int:
    instance = _load_instance_dir(args.instance)
    trajs = io.load_trajectories_csv(args.trajectories)
    directive = Directive.load(args.directive)
    directive.validate(instance.features, instance.n_states)
    expert = generate_expert_set(
        trajs, directive, instance.features, instance.transitions,
        replicas=args.replicas, seed=args.seed,
    )
    io.save_trajectories_csv(expert, args.out)
    print(f"wrote {len(expert)} expert trajectories to {args.out}")
    return 0


def cmd_train(args) -> int:
    instance = _load_instance_dir(args.instance)
    expert = io.load_trajectories_csv(args.expert)
    cfg = TrainConfig(
        epochs=args.epochs, learning_rate=args.lr, epsilon=args.epsilon,
        discount=args.gamma, seed=args.seed,
    )
    rewards, trace = train(instance, expert, cfg)
    io.save_rewards_csv(rewards, args.out)
    if args.trace:
        io.save_trace_csv(trace, args.trace)
    if trace:
        print(f"eval {trace[0]['eval']:.4f} -> {trace[-1]['eval']:.4f} over {len(trace)} epochs")
    centered = center_rewards(rewards)
    print(f"wrote rewards to {args.out} (centred range [{centered.min():.3f}, {centered.max():.3f}])")
    return 0


def cmd_metric(args) -> int:
    instance = _load_instance_dir(args.instance)
    r_a = io.load_rewards_csv(args.rewards_a)
    r_b = io.load_rewards_csv(args.rewards_b)
    trajs = io.load_trajectories_csv(args.trajectories)
    value = soft_k_l1(instance, r_a, r_b, trajs, args.epsilon)
    print(value)
    return 0


def cmd_whatif(args) -> int:
    instance = _load_instance_dir(args.instance)
    baseline = io.load_rewards_csv(args.baseline) if args.baseline else naive_rewards(instance)
    candidate = io.load_rewards_csv(args.candidate)
    initial = None
    if args.trajectories:
        initial = final_states(io.load_trajectories_csv(args.trajectories)[0])
    cfg = RolloutConfig(
        horizon=args.horizon, runs=args.runs, policy_mode=args.policy,
        epsilon=args.epsilon, seed=args.seed, initial_states=initial,
    )
    report = whatif_report(instance, baseline, candidate, args.groupby, cfg)
    Path(args.out).write_text(report.to_json())
    if args.plots_dir:
        plots = Path(args.plots_dir)
        plots.mkdir(parents=True, exist_ok=True)
        with open(plots / "categories.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["category", "actions_baseline", "actions_candidate",
                        "visits_baseline", "visits_candidate"])
            for j, name in enumerate(report.labels):
                w.writerow([name, repr(float(report.actions_baseline[j])),
                            repr(float(report.actions_candidate[j])),
                            repr(float(report.visits_baseline[j])),
                            repr(float(report.visits_candidate[j]))])
        with open(plots / "ever_called.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["arm_id", "p_baseline", "p_candidate"])
            for i in range(instance.n_arms):
                w.writerow([i, repr(float(report.ever_called_baseline[i])),
                            repr(float(report.ever_called_candidate[i]))])
    for j, name in enumerate(report.labels):
        print(f"{name}: actions {report.actions_baseline[j]:.2f} -> {report.actions_candidate[j]:.2f}, "
              f"visits {report.visits_baseline[j]:.2f} -> {report.visits_candidate[j]:.2f}")
    return 0


def cmd_bench(args) -> int:
    n_values = [int(x) for x in args.n.split(",")]
    rows = runtime_probe(n_values, m=args.m, k=args.k, seed=args.seed)
    save_timings_csv(rows, args.out)
    for row in rows:
        secs = "-" if row["status"] != "ok" else f"{row['seconds_per_step']:.4f}s"
        print(f"{row['method']:>12} n={row['n']:<4} {secs} {row['status']}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(args.data_dir), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rmab-irl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic instance directory")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--h", dest="horizon", type=int, default=10)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-features", action="store_true")
    p.add_argument("--observed-runs", type=int, default=0,
                   help="also simulate observed trajectories under naive rewards")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("ingest", help="estimate transitions from a listening log")
    p.add_argument("--log", required=True, help="csv with arm_id,timestep,state,action")
    p.add_argument("--m", type=int, required=True, help="number of states")
    p.add_argument("--smoothing", type=float, default=1.0)
    p.add_argument("--max-listen-rate", type=float, default=None,
                   help="drop arms whose listen fraction exceeds this")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("stats", help="aggregate action/visit statistics by category")
    p.add_argument("--instance", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--groupby", default="risk")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_stats)

    p = sub.add_parser("edit", help="convert a directive into expert trajectories")
    p.add_argument("--instance", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--directive", required=True)
    p.add_argument("--replicas", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_edit)

    p = sub.add_parser("train", help="learn rewards from expert trajectories")
    p.add_argument("--instance", required=True)
    p.add_argument("--expert", required=True)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.99)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--trace", default=None)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("metric", help="normalised soft policy L1 between two reward files")
    p.add_argument("--instance", required=True)
    p.add_argument("--rewards-a", required=True)
    p.add_argument("--rewards-b", required=True)
    p.add_argument("--trajectories", required=True)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.set_defaults(fn=cmd_metric)

    p = sub.add_parser("whatif", help="simulate baseline vs candidate rewards and compare")
    p.add_argument("--instance", required=True)
    p.add_argument("--baseline", default=None, help="rewards csv; defaults to naive rewards")
    p.add_argument("--candidate", required=True)
    p.add_argument("--trajectories", default=None,
                   help="observed trajectories; rollouts start from their final states")
    p.add_argument("--groupby", default="risk")
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--runs", type=int, default=60)
    p.add_argument("--policy", default="soft", choices=("hard", "epsilon", "soft"))
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--plots-dir", default=None)
    p.set_defaults(fn=cmd_whatif)

    p = sub.add_parser("bench", help="per-gradient-step timings vs the joint baseline")
    p.add_argument("--n", required=True, help="comma separated arm counts, e.g. 2,4,6")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default="./sessions")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (RmabError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
