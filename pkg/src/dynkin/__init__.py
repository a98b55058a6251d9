"""Exact equilibrium engine for two-player stopping games on finite event trees."""

from .core import (
    ATOM_MIX,
    BehavioralProfile,
    ConvexityError,
    EventTree,
    FrameSplitMap,
    InstanceError,
    ModelViolationError,
    PayoffPair,
    PayoffProcess,
    ProfileError,
    StageAction,
    UNIFORM_MIX,
    WAIT_MIX,
    evaluate_profile,
    evaluate_profile_table,
    mirror,
    outcome_kernel,
    split_frame,
    split_frames,
    validate_instance,
    validate_profile,
)
from .equilibrium import CaseLabel, EquilibriumReport, classify, construct, construct_pure
from .toolkit import GeneratorSpec, SchemaError, generate, load, save
from .verify import (
    GapCertificate,
    InvariantReport,
    best_response,
    brute_force_best_response,
    brute_force_payoff,
    brute_force_value,
    check_invariants,
    deviation_gap,
)
from .zerosum import (
    HittingTime,
    SolverParams,
    ValueProcess,
    hitting_time,
    punishment_strategy,
    pure_optimal_strategy,
    simple_optimal_strategy,
    solve_matrix_game,
    solve_value_process,
    stage_matrices,
    stage_value,
)

__version__ = "0.1.0"

__all__ = [
    "ATOM_MIX",
    "BehavioralProfile",
    "CaseLabel",
    "ConvexityError",
    "EquilibriumReport",
    "EventTree",
    "FrameSplitMap",
    "GapCertificate",
    "GeneratorSpec",
    "HittingTime",
    "InstanceError",
    "InvariantReport",
    "ModelViolationError",
    "PayoffPair",
    "PayoffProcess",
    "ProfileError",
    "SchemaError",
    "SolverParams",
    "StageAction",
    "UNIFORM_MIX",
    "ValueProcess",
    "WAIT_MIX",
    "best_response",
    "brute_force_best_response",
    "brute_force_payoff",
    "brute_force_value",
    "check_invariants",
    "classify",
    "construct",
    "construct_pure",
    "deviation_gap",
    "evaluate_profile",
    "evaluate_profile_table",
    "generate",
    "hitting_time",
    "load",
    "mirror",
    "outcome_kernel",
    "punishment_strategy",
    "pure_optimal_strategy",
    "save",
    "simple_optimal_strategy",
    "solve_matrix_game",
    "solve_value_process",
    "split_frame",
    "split_frames",
    "stage_matrices",
    "stage_value",
    "validate_instance",
    "validate_profile",
]
