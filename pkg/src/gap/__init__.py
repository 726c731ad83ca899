"""Probabilistic planning on learned hypergraph world models.

The package learns a world model from observed (state, action, result)
triples, keeps both maximal-likelihood projections of it current in O(1)
per observation, extracts maximum-probability plans with a Dijkstra
variant, certifies the induced dynamics with absorbing Markov-chain
analysis, scores state abstractions, and drives reproducible experiments
over five benchmark domains.
"""

from .abstraction import (
    AbstractionTransform,
    DependentColumns,
    LearningCurvePrediction,
    abstract_distribution,
    abstracted_k_p_bound,
    convergence_condition,
    empirical_quality,
    make_transform,
    predicted_curve,
    quality,
)
from .hypergraph import IncidenceHypergraph, Occasion, StateRegistry
from .markov import (
    TransitionMatrix,
    TrapReport,
    build_merged_transition_matrix,
    build_transition_matrix,
    column_norm,
    detect_traps,
    goal_probability_at,
    goal_probability_vector,
    k_p_bound,
    l_max,
    propagate,
    trap_probability,
    unit_distribution,
)
from .planner import (
    APOSTERIORI,
    APRIORI,
    LEAST_CHOSEN,
    RANDOM,
    GoalSpec,
    PolicyConfig,
    Sequence,
    astar_infer,
    choose_action,
    infer_sequence,
)
from .harness import (
    EpochRecord,
    ExperimentConfig,
    FitResult,
    NormEstimate,
    composition_routes,
    emit_results,
    epoch_curve,
    estimate_abstraction_norms,
    estimate_k_p,
    estimate_l_max,
    fit_reciprocal,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "IncidenceHypergraph",
    "Occasion",
    "StateRegistry",
    "Sequence",
    "GoalSpec",
    "PolicyConfig",
    "infer_sequence",
    "choose_action",
    "astar_infer",
    "APRIORI",
    "APOSTERIORI",
    "RANDOM",
    "LEAST_CHOSEN",
    "TransitionMatrix",
    "TrapReport",
    "build_transition_matrix",
    "build_merged_transition_matrix",
    "propagate",
    "goal_probability_vector",
    "goal_probability_at",
    "detect_traps",
    "trap_probability",
    "l_max",
    "k_p_bound",
    "column_norm",
    "unit_distribution",
    "AbstractionTransform",
    "DependentColumns",
    "LearningCurvePrediction",
    "make_transform",
    "abstract_distribution",
    "convergence_condition",
    "quality",
    "empirical_quality",
    "abstracted_k_p_bound",
    "predicted_curve",
    "ExperimentConfig",
    "EpochRecord",
    "FitResult",
    "NormEstimate",
    "run_experiment",
    "epoch_curve",
    "fit_reciprocal",
    "estimate_k_p",
    "estimate_l_max",
    "estimate_abstraction_norms",
    "composition_routes",
    "emit_results",
]
