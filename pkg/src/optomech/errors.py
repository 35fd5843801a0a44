"""Exception types raised by the optomech package."""

from numpy.linalg import LinAlgError


class OptomechError(Exception):
    """Base class for all package errors."""


class ValidationError(OptomechError, ValueError):
    """A parameter or configuration value is outside its admissible range."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class SolverFailure(OptomechError, RuntimeError):
    """The steady-state root finder produced no physical branch."""


class DegenerateBranchError(OptomechError, RuntimeError):
    """A steady-state root sits on the pole q = g_m / (2 g2)."""


class SingularSystemError(OptomechError, LinAlgError):
    """The Fourier-domain response matrix is numerically singular."""


class UnstableBranchError(OptomechError, RuntimeError):
    """A spectrum was requested on a branch that is not asymptotically stable."""
