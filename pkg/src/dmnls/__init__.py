"""dmnls: a pseudo-spectral simulation and verification lab for the
dispersion-managed nonlinear Schrodinger equation."""

__version__ = "0.1.0"

from .spectral import (Grid, ComplexField, NormSpec, make_grid, make_field,
                       free_propagate, gradient, galilean_apply,
                       fractional_galilean, norm, boundary_mass_fraction)
from .exponents import ExponentReport, exponent_report, admissible
from .dynamics import (ModelParams, StepperConfig, Trajectory,
                       gauss_legendre_01, dmnls_nonlinearity,
                       rhs_interaction_picture, evolve)
from .diagnostics import (DiagnosticsTimeSeries, FitResult, record,
                          pce_identity_check, decay_fit, scattering_profile,
                          nonscattering_probe, time_reversal_check)
from .ground_state import GroundStateConfig, GroundStateResult, optimize
from .config import RunConfig, ConfigError, parse_config, serialize_config
from .runner import run, RunOutcome, CheckResult

__all__ = [
    "Grid", "ComplexField", "NormSpec", "make_grid", "make_field",
    "free_propagate", "gradient", "galilean_apply", "fractional_galilean",
    "norm", "boundary_mass_fraction",
    "ExponentReport", "exponent_report", "admissible",
    "ModelParams", "StepperConfig", "Trajectory", "gauss_legendre_01",
    "dmnls_nonlinearity", "rhs_interaction_picture", "evolve",
    "DiagnosticsTimeSeries", "FitResult", "record", "pce_identity_check",
    "decay_fit", "scattering_profile", "nonscattering_probe",
    "time_reversal_check",
    "GroundStateConfig", "GroundStateResult", "optimize",
    "RunConfig", "ConfigError", "parse_config", "serialize_config",
    "run", "RunOutcome", "CheckResult",
    "__version__",
]
