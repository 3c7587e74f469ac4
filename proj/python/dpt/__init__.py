"""Optimal delay-power tradeoff solver for a single transmission queue.

The heavy lifting lives in the C++ extension; this package re-exports it.
"""

from dpt._core import (
    ChainClassification,
    ConstrainedPolicy,
    LpResult,
    Policy,
    PolicyIterationResult,
    SimulationConfig,
    SimulationResult,
    SolverError,
    StationaryDistribution,
    SystemModel,
    ThresholdSpec,
    TradeoffCurve,
    TradeoffPoint,
    build_transition_matrix,
    classify_chain,
    epsilon_prime,
    evaluate_policy,
    expand_threshold_policy,
    feasible_actions,
    initial_min_delay_spec,
    is_threshold_based,
    lp_optimal_delay,
    make_model,
    mix_policies,
    policy_for_constraint,
    policy_iteration,
    segment_slope,
    simulate,
    simulate_curve_points,
    stationary_distribution,
    trace_curve,
)

__all__ = [
    "ChainClassification",
    "ConstrainedPolicy",
    "LpResult",
    "Policy",
    "PolicyIterationResult",
    "SimulationConfig",
    "SimulationResult",
    "SolverError",
    "StationaryDistribution",
    "SystemModel",
    "ThresholdSpec",
    "TradeoffCurve",
    "TradeoffPoint",
    "build_transition_matrix",
    "classify_chain",
    "epsilon_prime",
    "evaluate_policy",
    "expand_threshold_policy",
    "feasible_actions",
    "initial_min_delay_spec",
    "is_threshold_based",
    "lp_optimal_delay",
    "make_model",
    "mix_policies",
    "policy_for_constraint",
    "policy_iteration",
    "segment_slope",
    "simulate",
    "simulate_curve_points",
    "stationary_distribution",
    "trace_curve",
]
