"""Finite-difference solvers for scalar conservation laws with
discontinuous spatial coefficients and vanishing capillarity/dispersion
regularization, plus the diagnostics and experiment drivers built on top.
"""

from .core import (
    BoundaryCondition,
    CoefficientK,
    Field,
    FluxModel,
    Grid1D,
    PiecewiseFunction,
    SchemeParams,
    average_k,
    diff_backward,
    diff_backward_all,
    diff_forward,
    diff_forward_all,
    extend,
    project_initial,
)
from .errors import (
    CFLInfeasible,
    CoefficientDegeneracy,
    DdfluxError,
    DdfluxNumericalError,
    DdfluxValidationError,
    DominanceViolation,
    FluxEvaluationError,
    InvalidCoefficient,
    InvalidInitialData,
    NonFiniteState,
    ParseError,
    SingularSystem,
    ValidationError,
)
from .fluxes import (
    FluxKind,
    NumericalFlux,
    eo_flux,
    interface_flux,
    interface_flux_profile,
    llf_flux,
)
from .models import burgers, cubic, linear_advection, model_registry, two_phase_capillarity
from .tridiag import solve_tridiagonal
from .capillarity import CapillarityStepper, CflMode, CflResult, cfl_dt
from .dispersive import DispersiveStepper, cfl_dt_a
from .diagnostics import (
    APrioriAccumulator,
    Norms,
    Plateau,
    StepDiagnostics,
    classify_structure,
    energy,
    entropy_residual,
    entropy_residual_max,
    kruzkov_constants,
    l1_restricted_difference,
    mass,
    norms,
    restrict,
    shock_position,
)
from .experiments import (
    RefinementResult,
    RefinementRow,
    RunReport,
    Scenario,
    diagnostics_csv_text,
    emit_diagnostics_csv,
    emit_solution_csv,
    parse_config,
    presets,
    refinement_study,
    run,
    solution_csv_text,
)

__version__ = "0.1.0"

__all__ = [
    "APrioriAccumulator",
    "BoundaryCondition",
    "CFLInfeasible",
    "CapillarityStepper",
    "CflMode",
    "CflResult",
    "CoefficientDegeneracy",
    "CoefficientK",
    "DdfluxError",
    "DdfluxNumericalError",
    "DdfluxValidationError",
    "DispersiveStepper",
    "DominanceViolation",
    "Field",
    "FluxEvaluationError",
    "FluxKind",
    "FluxModel",
    "Grid1D",
    "InvalidCoefficient",
    "InvalidInitialData",
    "NonFiniteState",
    "Norms",
    "NumericalFlux",
    "ParseError",
    "PiecewiseFunction",
    "Plateau",
    "RefinementResult",
    "RefinementRow",
    "RunReport",
    "Scenario",
    "SchemeParams",
    "SingularSystem",
    "StepDiagnostics",
    "ValidationError",
    "average_k",
    "burgers",
    "cfl_dt",
    "cfl_dt_a",
    "classify_structure",
    "cubic",
    "diagnostics_csv_text",
    "diff_backward",
    "diff_backward_all",
    "diff_forward",
    "diff_forward_all",
    "emit_diagnostics_csv",
    "emit_solution_csv",
    "energy",
    "entropy_residual",
    "entropy_residual_max",
    "eo_flux",
    "extend",
    "interface_flux",
    "interface_flux_profile",
    "kruzkov_constants",
    "l1_restricted_difference",
    "linear_advection",
    "llf_flux",
    "mass",
    "model_registry",
    "norms",
    "parse_config",
    "presets",
    "project_initial",
    "refinement_study",
    "restrict",
    "run",
    "shock_position",
    "solution_csv_text",
    "solve_tridiagonal",
    "two_phase_capillarity",
]
