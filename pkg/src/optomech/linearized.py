"""Linear response of the fluctuations around a steady state.

Fluctuation vector ordering is ``(da, da_dag, dp, dq)``; the noise input
channels are ``(xi, a_in, a_in_dag)`` where the optical channels are
normalised so that the physical drive is ``sqrt(2 kappa) * a_in``.
Fourier convention: ``d/dt -> -i omega``.

Everything here is vectorised over ``omega``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .params import PhysicalParams
from .steady_state import SteadyState

ROWS = ("a", "adag", "p", "q")
CHANNELS = ("xi", "ain", "aindag")
# column of the inverse response matrix that each noise channel enters through
_CHANNEL_COLUMN = {"xi": 2, "ain": 0, "aindag": 1}
SINGULAR_RTOL = 1e-14


def stiffness(ss: SteadyState, params: PhysicalParams) -> float:
    """Restoring coefficient of the momentum equation, ``omega_m + 2 g2 |a_s|^2``."""
    return params.omega_m + 2 * params.g2 * ss.photon_number


def bare_frequency_sq(ss: SteadyState, params: PhysicalParams) -> float:
    """Squared mechanical frequency including the quadratic-coupling stiffening."""
    return params.omega_m * stiffness(ss, params)


def frequency_grid(params: PhysicalParams, start=0.01, stop=3.0, points=2001) -> np.ndarray:
    """Uniform probe grid in rad/s spanning ``[start, stop] * omega_m``."""
    return np.linspace(start, stop, points) * params.omega_m


def complex_drift(ss: SteadyState, params: PhysicalParams) -> np.ndarray:
    """Coefficient matrix of the linearised equations in the ``(da, da_dag, dp, dq)`` basis."""
    k, D, G = params.kappa, ss.delta_eff, complex(ss.G)
    return np.array(
        [
            [-(k + 1j * D), 0, 0, 1j * G],
            [0, -(k - 1j * D), 0, -1j * G.conjugate()],
            [G.conjugate(), G, -params.gamma_m, -stiffness(ss, params)],
            [0, 0, params.omega_m, 0],
        ],
        dtype=complex,
    )


def drift_matrix(ss: SteadyState, params: PhysicalParams) -> np.ndarray:
    """Real drift matrix of ``(Re da, Im da, dp, dq)``.

    Real and imaginary parts of ``G`` are both handled, although with the
    standard phase choice ``G`` is real.
    """
    k, D = params.kappa, ss.delta_eff
    Gr, Gi = complex(ss.G).real, complex(ss.G).imag
    return np.array(
        [
            [-k, D, 0.0, -Gi],
            [-D, -k, 0.0, Gr],
            [2 * Gr, 2 * Gi, -params.gamma_m, -stiffness(ss, params)],
            [0.0, 0.0, params.omega_m, 0.0],
        ]
    )


@dataclass(frozen=True)
class FourierSystem:
    omega: np.ndarray
    matrix: np.ndarray
    noise_coupling: np.ndarray


def fourier_matrix(omega, ss: SteadyState, params: PhysicalParams) -> FourierSystem:
    """Frequency-domain response matrix ``-i omega I - drift`` and its input couplings."""
    omega = np.asarray(omega, dtype=float)
    base = -complex_drift(ss, params)
    eye = np.eye(4)
    matrix = base + (-1j * omega)[..., None, None] * eye
    root = np.sqrt(2 * params.kappa)
    coupling = np.array([root, root, 1.0, 0.0], dtype=complex)
    return FourierSystem(omega=omega, matrix=matrix, noise_coupling=coupling)


class Transfer:
    """Transfer coefficients from noise channels to fluctuations.

    ``coefficients[..., row, channel]`` with rows in ``ROWS`` order and
    channels in ``CHANNELS`` order. Attribute access such as ``t.q_xi`` or
    ``t.adag_ain`` returns one coefficient array.
    """

    def __init__(self, omega, coefficients):
        self.omega = np.asarray(omega)
        self.coefficients = np.asarray(coefficients)

    def get(self, row, channel):
        return self.coefficients[..., ROWS.index(row), CHANNELS.index(channel)]

    def __getattr__(self, name):
        row, _, channel = name.partition("_")
        if row in ROWS and channel in CHANNELS:
            return self.get(row, channel)
        raise AttributeError(name)


def solve_transfer(omega, ss: SteadyState, params: PhysicalParams) -> Transfer:
    """Invert the response matrix at each frequency.

    Raises
    ------
    SingularSystemError
        If ``|det| < 1e-14 * scale**4`` at any frequency, where ``scale`` is
        the largest matrix entry magnitude.
    """
    system = fourier_matrix(omega, ss, params)
    m = system.matrix
    scale = np.max(np.abs(m), axis=(-2, -1))
    det = np.linalg.det(m)
    if np.any(np.abs(det) < SINGULAR_RTOL * scale**4):
        raise SingularSystemError("response matrix is singular at one or more probe frequencies")
    inv = np.linalg.inv(m)
    cols = [_CHANNEL_COLUMN[c] for c in CHANNELS]
    return Transfer(system.omega, inv[..., :, cols])


def theta(omega, ss: SteadyState, params: PhysicalParams):
    """``(omega + i kappa - Delta)(omega + i kappa + Delta)``."""
    w = np.asarray(omega) + 1j * params.kappa
    return (w - ss.delta_eff) * (w + ss.delta_eff)


def d_of_omega(omega, ss: SteadyState, params: PhysicalParams):
    """Characteristic denominator of the displacement response.

    ``d = 2 Delta G^2 omega_m + Theta(omega) (w_t^2 - omega^2 - i omega gamma_m)``
    with ``w_t^2 = omega_m (omega_m + 2 g2 |a_s|^2)``. It equals minus the
    determinant of the Fourier response matrix.
    """
    omega = np.asarray(omega, dtype=float)
    G2 = abs(complex(ss.G)) ** 2
    mech = bare_frequency_sq(ss, params) - omega**2 - 1j * omega * params.gamma_m
    return 2 * ss.delta_eff * G2 * params.omega_m + theta(omega, ss, params) * mech


def closed_form_q_transfer(omega, ss: SteadyState, params: PhysicalParams):
    """Displacement response ``(T_q_xi, T_q_ain, T_q_aindag)`` from the closed-form solution.

    The optical coefficients multiply ``sqrt(2 kappa) a_in`` and
    ``sqrt(2 kappa) a_in_dag``. Assumes real ``G``.
    """
    omega = np.asarray(omega, dtype=float)
    k, D, G, w = params.kappa, ss.delta_eff, float(np.real(ss.G)), params.omega_m
    pref = -w / d_of_omega(omega, ss, params)
    t_xi = pref * (D**2 + (k - 1j * omega) ** 2)
    t_ain = pref * (-1j * G) * (omega + 1j * k + D)
    t_aindag = pref * (-1j * G) * (omega + 1j * k - D)
    return t_xi, t_ain, t_aindag


@dataclass(frozen=True)
class ResponsePoint:
    """Effective mechanical frequency, damping and susceptibility at probe frequency ``omega``.

    ``omega_eff`` is the signed square root of ``omega_eff_sq``: negative
    when the optical spring drives the squared frequency below zero, in
    which case ``softening`` is set. ``spring_shift`` and
    ``optical_damping`` are the optical parts ``omega_eff_sq - w_t^2`` and
    ``gamma_eff - gamma_m``, kept separately so that small values survive
    without cancellation.
    """

    omega: np.ndarray
    omega_eff: np.ndarray
    gamma_eff: np.ndarray
    chi: np.ndarray
    omega_eff_sq: np.ndarray
    softening: np.ndarray
    spring_shift: np.ndarray
    optical_damping: np.ndarray

    def frequency_shift(self, bare_sq):
        """``omega_eff - sqrt(bare_sq)`` evaluated without subtractive cancellation."""
        w_t = np.sqrt(bare_sq)
        return np.where(self.softening, self.omega_eff - w_t, self.spring_shift / (np.abs(self.omega_eff) + w_t))


def effective_response(omega, ss: SteadyState, params: PhysicalParams) -> ResponsePoint:
    omega = np.asarray(omega, dtype=float)
    k, D, w = params.kappa, ss.delta_eff, params.omega_m
    G2 = abs(complex(ss.G)) ** 2
    lorentz = ((omega - D) ** 2 + k**2) * ((omega + D) ** 2 + k**2)
    shift = G2 * w * 2 * D * (omega**2 - D**2 - k**2) / lorentz
    omega_eff_sq = bare_frequency_sq(ss, params) + shift
    damping = G2 * w * k * 4 * D / lorentz
    gamma_eff = params.gamma_m + damping
    chi = w / (omega_eff_sq - omega**2 - 1j * omega * gamma_eff)
    softening = omega_eff_sq < 0
    omega_eff = np.sign(omega_eff_sq) * np.sqrt(np.abs(omega_eff_sq))
    return ResponsePoint(
        omega=omega,
        omega_eff=omega_eff,
        gamma_eff=gamma_eff,
        chi=chi,
        omega_eff_sq=omega_eff_sq,
        softening=softening,
        spring_shift=shift,
        optical_damping=damping,
    )


def identity_frequency(ss: SteadyState, params: PhysicalParams) -> float:
    """Probe frequency at which the optical-spring shift vanishes, ``sqrt(Delta^2 + kappa^2)``."""
    return float(np.hypot(ss.delta_eff, params.kappa))
