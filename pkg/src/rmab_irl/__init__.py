"""Reward learning for restless multi-armed bandits from aggregate directives.

The package turns "move interventions from category A to category B" style
feedback into expert trajectories, fits per-arm per-state rewards by gradient
ascent through a differentiable Whittle-index top-k policy, and lets an
operator inspect the consequences by simulation before adopting the result.
"""

from .core import (
    FeatureTable,
    RmabInstance,
    Trajectory,
    check_rewards,
    default_risk_thresholds,
    estimate_transitions,
    risk_score,
    risk_scores,
    synth_features,
    synth_instance,
    synth_transitions,
)
from .directives import (
    Directive,
    apply_directive,
    eval_predicate,
    generate_expert_set,
    validate_predicate,
)
from .learning import TrainConfig, center_rewards, eval_gradient, eval_likelihood, train
from .simulate import (
    Grouping,
    RolloutConfig,
    WhatIfReport,
    aggregate_stats,
    final_states,
    listening_states,
    naive_rewards,
    policy_l1,
    simulate,
    soft_k_l1,
    soft_policy_fn,
    whatif_report,
)
from .softtopk import soft_top_k, soft_top_k_jacobian
from .whittle import (
    SubsidyQ,
    check_indexability,
    subsidy_q_values,
    whittle_gradient,
    whittle_index,
    whittle_table,
)

__all__ = [
    "Directive",
    "FeatureTable",
    "Grouping",
    "RmabInstance",
    "RolloutConfig",
    "SubsidyQ",
    "TrainConfig",
    "Trajectory",
    "WhatIfReport",
    "aggregate_stats",
    "apply_directive",
    "center_rewards",
    "check_indexability",
    "check_rewards",
    "default_risk_thresholds",
    "estimate_transitions",
    "eval_gradient",
    "eval_likelihood",
    "eval_predicate",
    "final_states",
    "generate_expert_set",
    "listening_states",
    "naive_rewards",
    "policy_l1",
    "risk_score",
    "risk_scores",
    "simulate",
    "soft_k_l1",
    "soft_policy_fn",
    "soft_top_k",
    "soft_top_k_jacobian",
    "subsidy_q_values",
    "synth_features",
    "synth_instance",
    "synth_transitions",
    "train",
    "validate_predicate",
    "whatif_report",
    "whittle_gradient",
    "whittle_index",
    "whittle_table",
]

__version__ = "0.1.0"
