"""Distributed Nash-equilibrium seeking for saturated integrator-chain players.

Players with heterogeneous integrator-chain dynamics and hard input limits
cooperate over a directed communication graph to drive their outputs to the
Nash equilibrium of a strongly monotone game. The package provides the game
and graph models, the per-player coordinate change and bounded control laws,
the adaptive consensus estimator, a fixed-step simulator with convergence
diagnostics, and a scenario-driven command line interface.
"""

from .dynamics import (
    FORM_ALTERNATE,
    FORM_STANDARD,
    PlayerSpec,
    Transformation,
    build_transformation,
    canonical_a,
    canonical_b,
    chain_matrices,
    controllability_matrix,
    delta_for_limit,
    geometric_control_bound,
    max_control_bound,
    output_coefficients,
    saturation,
    similarity_residual,
)
from .errors import (
    ConfigError,
    ConnectivityError,
    ConvergenceError,
    GainIntegrityError,
    IllConditionedGameError,
    IntegrationError,
    ModeOrderError,
    MonotonicityError,
    NashseekError,
    SingularTransformError,
    SymmetryError,
)
from .game import (
    GameCertificate,
    GameModel,
    QuadraticGame,
    check_game,
    ring_game,
    solve_nash_closed_form,
    solve_nash_gradient_play,
)
from .graph import (
    Digraph,
    LaplacianBundle,
    PinningDiagnostic,
    cycle_digraph,
    is_strongly_connected,
    laplacian,
    pinning_diagnostic,
    random_strongly_connected,
)
from .scenario import (
    BuiltScenario,
    ScenarioConfig,
    build,
    load_config,
    parse_config,
    reference_scenario,
)
from .seeker import (
    ConsensusRates,
    SeekerMode,
    SeekerState,
    certified_bound,
    consensus_rhs,
    control,
    innovation,
    innovation_matrix,
    integral_scale,
    tilde_x1,
)
from .sim import (
    SimConfig,
    Summary,
    Trajectory,
    detect_convergence,
    pack_state,
    rk4_step,
    run,
    unpack_state,
    unsaturated_entry,
)

__version__ = "0.1.0"

__all__ = [
    "BuiltScenario",
    "ConfigError",
    "ConnectivityError",
    "ConsensusRates",
    "ConvergenceError",
    "Digraph",
    "FORM_ALTERNATE",
    "FORM_STANDARD",
    "GainIntegrityError",
    "GameCertificate",
    "GameModel",
    "IllConditionedGameError",
    "IntegrationError",
    "LaplacianBundle",
    "ModeOrderError",
    "MonotonicityError",
    "NashseekError",
    "PinningDiagnostic",
    "PlayerSpec",
    "QuadraticGame",
    "ScenarioConfig",
    "SeekerMode",
    "SeekerState",
    "SimConfig",
    "SingularTransformError",
    "Summary",
    "SymmetryError",
    "Trajectory",
    "Transformation",
    "build",
    "build_transformation",
    "canonical_a",
    "canonical_b",
    "certified_bound",
    "chain_matrices",
    "check_game",
    "consensus_rhs",
    "control",
    "controllability_matrix",
    "cycle_digraph",
    "delta_for_limit",
    "detect_convergence",
    "geometric_control_bound",
    "innovation",
    "innovation_matrix",
    "integral_scale",
    "is_strongly_connected",
    "laplacian",
    "load_config",
    "max_control_bound",
    "output_coefficients",
    "pack_state",
    "parse_config",
    "pinning_diagnostic",
    "random_strongly_connected",
    "reference_scenario",
    "ring_game",
    "rk4_step",
    "run",
    "saturation",
    "similarity_residual",
    "solve_nash_closed_form",
    "solve_nash_gradient_play",
    "tilde_x1",
    "unpack_state",
    "unsaturated_entry",
]
