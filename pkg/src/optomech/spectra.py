"""Noise spectra of the mechanical and optical fluctuations.

A spectrum ``S_AB(omega)`` is defined through
``<A(omega) B(omega')> = S_AB(omega) delta(omega + omega')``, without
symmetrisation. The displacement spectrum is ``S_q = S_qq``; the photon
spectrum is normally ordered, ``S_a = S_{a_dag a}``, so vacuum input alone
gives zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar

from .errors import UnstableBranchError
from .linearized import ROWS, bare_frequency_sq, d_of_omega, drift_matrix, solve_transfer
from .params import PhysicalParams
from .stability import routh_hurwitz
from .steady_state import SteadyState

_CHUNK = 100_000


@dataclass(frozen=True)
class NoiseModel:
    bath_temperature: float = 300.0
    photon_occupation: float = 0.0

    @classmethod
    def from_params(cls, params: PhysicalParams) -> NoiseModel:
        return cls(params.bath_temperature, params.photon_occupation)


@dataclass(frozen=True)
class SpectrumPoint:
    omega: np.ndarray
    S_q: np.ndarray
    S_a: np.ndarray


def thermal_psd(omega, noise: NoiseModel, params: PhysicalParams):
    """Spectral density of the Brownian force, ``(gamma_m/omega_m) omega [coth(hbar omega / 2 kB T) + 1]``.

    Evaluated as ``2 omega / (1 - exp(-hbar omega / kB T))``, which avoids
    the cancellation in ``coth + 1`` for negative frequencies; the
    ``omega = 0`` limit is ``2 kB T / hbar``.
    """
    omega = np.asarray(omega, dtype=float)
    hbar, kB = params.constants.hbar, params.constants.kB
    T = noise.bath_temperature
    rate = params.gamma_m / params.omega_m
    if T == 0:
        return np.where(omega > 0, 2 * rate * omega, 0.0)
    kT = kB * T
    zero = omega == 0
    with np.errstate(over="ignore"):
        denom = -np.expm1(-hbar * np.where(zero, 1.0, omega) / kT)
        value = np.where(zero, 2 * kT / hbar, 2 * omega / denom)
    return rate * value


def noise_correlations(omega, noise: NoiseModel, params: PhysicalParams):
    """Matrix ``C[..., x, y]`` with ``<x(omega) y(omega')> = C_xy delta(omega + omega')``.

    Channels follow ``CHANNELS``; optical channels include the ``2 kappa``
    of their ``sqrt(2 kappa)`` input coupling.
    """
    omega = np.asarray(omega, dtype=float)
    N = noise.photon_occupation
    c = np.zeros(omega.shape + (3, 3))
    c[..., 0, 0] = thermal_psd(omega, noise, params)
    c[..., 1, 2] = 2 * params.kappa * (N + 1)
    c[..., 2, 1] = 2 * params.kappa * N
    return c


def _require_stable(ss, params):
    stable = ss.stable if ss.stable is not None else routh_hurwitz(ss, params).stable
    if not stable:
        raise UnstableBranchError("spectra are undefined on an unstable or marginal branch")


def phonon_spectrum(omega, ss: SteadyState, noise: NoiseModel, params: PhysicalParams):
    """Displacement spectrum ``S_q`` in closed form.

    ``S_q = omega_m^2 / |d|^2 * { |Delta^2 + (kappa - i omega)^2|^2 S_xi
    + 2 kappa G^2 [((omega - Delta)^2 + kappa^2) N + ((omega + Delta)^2 + kappa^2)(N + 1)] }``
    """
    _require_stable(ss, params)
    omega = np.asarray(omega, dtype=float)
    k, D, w = params.kappa, ss.delta_eff, params.omega_m
    N = noise.photon_occupation
    G2 = abs(complex(ss.G)) ** 2
    cav = np.abs(D**2 + (k - 1j * omega) ** 2) ** 2
    optical = 2 * k * G2 * (((omega - D) ** 2 + k**2) * N + ((omega + D) ** 2 + k**2) * (N + 1))
    return w**2 / np.abs(d_of_omega(omega, ss, params)) ** 2 * (cav * thermal_psd(omega, noise, params) + optical)


def _contract(first, second, corr):
    # sum_xy first_x(omega) second_y(-omega) C_xy(omega)
    return np.einsum("...x,...xy,...y->...", first, corr, second)


def _chunks(omega):
    flat = np.asarray(omega, dtype=float).ravel()
    for start in range(0, flat.size, _CHUNK):
        yield flat[start : start + _CHUNK]


def _transfer_spectrum(omega, ss, noise, params, first_row, second_row):
    out = []
    for chunk in _chunks(omega):
        t_pos = solve_transfer(chunk, ss, params)
        t_neg = solve_transfer(-chunk, ss, params)
        first = t_pos.coefficients[:, ROWS.index(first_row), :]
        second = t_neg.coefficients[:, ROWS.index(second_row), :]
        out.append(_contract(first, second, noise_correlations(chunk, noise, params)))
    return np.concatenate(out).reshape(np.shape(omega)).real


def phonon_spectrum_transfer(omega, ss: SteadyState, noise: NoiseModel, params: PhysicalParams):
    """``S_q`` assembled from matrix-inversion transfer functions; an independent route to :func:`phonon_spectrum`."""
    _require_stable(ss, params)
    return _transfer_spectrum(omega, ss, noise, params, "q", "q")


def photon_spectrum(omega, ss: SteadyState, noise: NoiseModel, params: PhysicalParams, method="quadratic"):
    """Normally ordered intracavity spectrum ``S_a``.

    ``method="quadratic"`` contracts transfer rows with the correlation
    matrix in one quadratic form; ``method="sum"`` adds the three non-zero
    channel pairings term by term. Both give the same number.
    """
    _require_stable(ss, params)
    if method == "quadratic":
        return _transfer_spectrum(omega, ss, noise, params, "adag", "a")
    if method != "sum":
        raise ValueError(f"unknown method {method!r}")
    N = noise.photon_occupation
    out = []
    for chunk in _chunks(omega):
        pos = solve_transfer(chunk, ss, params)
        neg = solve_transfer(-chunk, ss, params)
        total = pos.adag_xi * neg.a_xi * thermal_psd(chunk, noise, params)
        total = total + 2 * params.kappa * (N + 1) * pos.adag_ain * neg.a_aindag
        total = total + 2 * params.kappa * N * pos.adag_aindag * neg.a_ain
        out.append(total)
    return np.concatenate(out).reshape(np.shape(omega)).real


def spectrum(omega, ss: SteadyState, noise: NoiseModel, params: PhysicalParams) -> SpectrumPoint:
    omega = np.asarray(omega, dtype=float)
    return SpectrumPoint(
        omega=omega,
        S_q=phonon_spectrum(omega, ss, noise, params),
        S_a=photon_spectrum(omega, ss, noise, params),
    )


def narrowest_linewidth(ss: SteadyState, params: PhysicalParams) -> float:
    """Smallest decay rate among the linearised modes (half width of the sharpest spectral line)."""
    return float(np.min(np.abs(np.linalg.eigvals(drift_matrix(ss, params)).real)))


def integration_span(ss: SteadyState, params: PhysicalParams) -> float:
    w_t = math.sqrt(abs(bare_frequency_sq(ss, params)))
    return 8 * max(params.omega_m, w_t, abs(ss.delta_eff), params.kappa)


def integration_grid(ss: SteadyState, params: PhysicalParams, points=None, span=None,
                     points_per_linewidth=8, max_points=2**23) -> np.ndarray:
    """Uniform symmetric grid with an odd number of points for Simpson integration.

    By default the spacing resolves the narrowest mode with
    ``points_per_linewidth`` samples per half width.
    """
    span = integration_span(ss, params) if span is None else span
    if points is None:
        h = narrowest_linewidth(ss, params) / points_per_linewidth
        points = int(math.ceil(2 * span / h)) + 1
        if points > max_points:
            warnings.warn(
                f"integration grid capped at {max_points} points; narrow lines may be under-resolved",
                RuntimeWarning,
                stacklevel=2,
            )
            points = max_points
    points = max(int(points), 3)
    if points % 2 == 0:
        points += 1
    return np.linspace(-span, span, points)


def position_variance(ss: SteadyState, noise: NoiseModel, params: PhysicalParams, grid=None, **grid_options) -> float:
    """``<dq^2> = (1/2 pi) * integral S_q(omega) d omega`` by composite Simpson.

    Warns if the integrand at either grid edge exceeds ``1e-6`` of its peak.
    """
    _require_stable(ss, params)
    if grid is None:
        grid = integration_grid(ss, params, **grid_options)
    s_q = np.concatenate([phonon_spectrum(c, ss, noise, params) for c in _chunks(grid)])
    peak = np.max(s_q)
    if peak > 0 and max(s_q[0], s_q[-1]) > 1e-6 * peak:
        warnings.warn("spectrum at the integration edge exceeds 1e-6 of its peak; variance may be truncated",
                      RuntimeWarning, stacklevel=2)
    return float(simpson(s_q, x=grid) / (2 * np.pi))


def spectrum_peak(func, ss: SteadyState, noise: NoiseModel, params: PhysicalParams):
    """Location and value of the global maximum of ``func(omega, ss, noise, params)``.

    A coarse grid over the integration span is combined with dense windows
    around the drift-matrix resonances; the best sample is refined with a
    bounded scalar search.
    """
    span = integration_span(ss, params)
    eig = np.linalg.eigvals(drift_matrix(ss, params))
    parts = [np.linspace(-span, span, 4001)]
    for lam in eig:
        width = max(abs(lam.real), 1e-12 * params.omega_m)
        for centre in (lam.imag, -lam.imag):
            parts.append(centre + np.linspace(-40, 40, 801) * width)
    grid = np.unique(np.concatenate(parts))
    values = func(grid, ss, noise, params)
    i = int(np.argmax(values))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda x: -float(func(np.array([x]), ss, noise, params)[0]),
                              bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * (hi - lo)})
        if -res.fun > values[i]:
            return float(res.x), float(-res.fun)
    return float(grid[i]), float(values[i])
