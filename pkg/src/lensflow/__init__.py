"""Numerical construction of a U(n)-invariant shrinking Kahler-Ricci soliton
on a twisted projective-line bundle, and the motion of lens-space orbits
under the coupled (Ricci-)mean curvature flow and the ordinary one."""

__version__ = "0.1.0"

from .errors import (
    ArithmeticFault,
    ConstructionError,
    DomainError,
    IntegrationError,
    LensflowError,
    ValidationFailure,
)
from .profile import (
    SolitonParams,
    SolitonProfile,
    build_profile,
    coordinate_convert,
    solve_soliton_constant,
    soliton_constant_residual,
)
from .geometry import (
    HessianSpectrum,
    RadialState,
    hessian_spectrum,
    lambda_of_radius,
    lambda_of_s,
    lambda_of_W,
    lambda_tail_coefficients,
    level_set_radius,
    mean_curvature_norm2,
    metric_at,
    potential_P,
    radial_state,
    second_fundamental_norm2,
)
from .critical import (
    CriticalRadii,
    find_critical_radii,
    shrinker_expander_classification,
)
from .flows import (
    FlowConfig,
    FlowTrajectory,
    integrate_mcf,
    integrate_rmcf,
    maximal_time_closed_form,
    type_one_rate,
)
from .validation import (
    ValidationReport,
    brute_force_h_ode,
    ode_residual_scan,
    probe_points,
    soliton_equation_residual_fd,
    validation_report,
)

__all__ = [
    "ArithmeticFault",
    "ConstructionError",
    "CriticalRadii",
    "DomainError",
    "FlowConfig",
    "FlowTrajectory",
    "HessianSpectrum",
    "IntegrationError",
    "LensflowError",
    "RadialState",
    "SolitonParams",
    "SolitonProfile",
    "ValidationFailure",
    "ValidationReport",
    "brute_force_h_ode",
    "build_profile",
    "coordinate_convert",
    "find_critical_radii",
    "hessian_spectrum",
    "integrate_mcf",
    "integrate_rmcf",
    "lambda_of_W",
    "lambda_of_radius",
    "lambda_of_s",
    "lambda_tail_coefficients",
    "level_set_radius",
    "maximal_time_closed_form",
    "mean_curvature_norm2",
    "metric_at",
    "ode_residual_scan",
    "potential_P",
    "probe_points",
    "radial_state",
    "second_fundamental_norm2",
    "shrinker_expander_classification",
    "solve_soliton_constant",
    "soliton_constant_residual",
    "soliton_equation_residual_fd",
    "type_one_rate",
    "validation_report",
]
