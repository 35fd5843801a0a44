"""Optomechanical cavity with linear and quadratic coupling, linearised about its steady state."""

from .errors import (
    DegenerateBranchError,
    OptomechError,
    SingularSystemError,
    SolverFailure,
    UnstableBranchError,
    ValidationError,
)
from .linearized import (
    FourierSystem,
    ResponsePoint,
    Transfer,
    closed_form_q_transfer,
    d_of_omega,
    drift_matrix,
    effective_response,
    fourier_matrix,
    frequency_grid,
    solve_transfer,
    theta,
)
from .params import CONSTANTS, Constants, DerivedParams, PhysicalParams, derive_constants, load_config
from .spectra import (
    NoiseModel,
    SpectrumPoint,
    phonon_spectrum,
    phonon_spectrum_transfer,
    photon_spectrum,
    position_variance,
    thermal_psd,
)
from .stability import StabilityReport, characteristic_coefficients, eigen_check, routh_hurwitz
from .steady_state import SteadyState, effective_coupling, operating_point, residual, select_branch, solve_steady

__version__ = "0.1.0"

__all__ = [
    "characteristic_coefficients",
    "closed_form_q_transfer",
    "CONSTANTS",
    "Constants",
    "d_of_omega",
    "DegenerateBranchError",
    "derive_constants",
    "DerivedParams",
    "drift_matrix",
    "effective_coupling",
    "effective_response",
    "eigen_check",
    "fourier_matrix",
    "FourierSystem",
    "frequency_grid",
    "load_config",
    "NoiseModel",
    "operating_point",
    "OptomechError",
    "phonon_spectrum",
    "phonon_spectrum_transfer",
    "photon_spectrum",
    "PhysicalParams",
    "position_variance",
    "residual",
    "ResponsePoint",
    "routh_hurwitz",
    "select_branch",
    "SingularSystemError",
    "solve_steady",
    "solve_transfer",
    "SolverFailure",
    "SpectrumPoint",
    "StabilityReport",
    "SteadyState",
    "thermal_psd",
    "theta",
    "Transfer",
    "UnstableBranchError",
    "ValidationError",
    "__version__",
]
