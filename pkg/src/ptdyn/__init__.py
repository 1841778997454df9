"""Finite-dimensional PT-symmetric quantum mechanics.

CPT-frame algebra, time evolution under time-dependent metric inner
products, and quantitative verification of the adiabatic approximation.
"""

from .adiabatic import (
    AdiabaticReport,
    BrokenSymmetryError,
    EigenFrame,
    LevelTrackingError,
    adiabatic_bound,
    adiabatic_bound_profile,
    build_eigenframe,
    build_report,
    dynamical_phase,
    fidelity_loss,
    gauge_fix,
    level_coupling_residual,
    operator_phase,
)
from .config import (
    ConfigError,
    ScenarioConfig,
    frame_from_dict,
    frame_to_dict,
    load_config,
    save_config,
)
from .dynamics import (
    Equation,
    EvolutionProblem,
    IntegrationAbort,
    Trajectory,
    effective_generator,
    evolve_propagator,
    evolve_state,
    norm_drift_rate,
)
from .frames import (
    CPTFrame,
    FrameAxiomError,
    FrameFamily,
    SymmetryReport,
    cpt_adjoint,
    cpt_inner,
    cpt_norm,
    norm_equivalence_bounds,
    symmetry_report,
    validate_frames,
)
from .linalg import (
    AntilinearOperator,
    ConvergenceError,
    OperatorFamily,
    eigenpairs,
    family_derivative,
    hermitian_sqrt,
    matrix_exp,
    operator_norm,
)
from .models import (
    ConstantMetricModel,
    ScalarFunction,
    TwoLevelModel,
    build_constant_metric,
    build_two_level,
)

__version__ = "0.1.0"

__all__ = [
    "AdiabaticReport",
    "AntilinearOperator",
    "BrokenSymmetryError",
    "CPTFrame",
    "ConfigError",
    "ConstantMetricModel",
    "ConvergenceError",
    "EigenFrame",
    "Equation",
    "EvolutionProblem",
    "FrameAxiomError",
    "FrameFamily",
    "IntegrationAbort",
    "LevelTrackingError",
    "OperatorFamily",
    "ScalarFunction",
    "ScenarioConfig",
    "SymmetryReport",
    "Trajectory",
    "TwoLevelModel",
    "adiabatic_bound",
    "adiabatic_bound_profile",
    "build_constant_metric",
    "build_eigenframe",
    "build_report",
    "build_two_level",
    "cpt_adjoint",
    "cpt_inner",
    "cpt_norm",
    "dynamical_phase",
    "effective_generator",
    "eigenpairs",
    "evolve_propagator",
    "evolve_state",
    "family_derivative",
    "fidelity_loss",
    "frame_from_dict",
    "frame_to_dict",
    "gauge_fix",
    "hermitian_sqrt",
    "level_coupling_residual",
    "load_config",
    "matrix_exp",
    "norm_drift_rate",
    "norm_equivalence_bounds",
    "operator_norm",
    "operator_phase",
    "save_config",
    "symmetry_report",
    "validate_frames",
]
