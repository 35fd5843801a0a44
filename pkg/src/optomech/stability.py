"""Routh-Hurwitz stability of a steady-state branch, with an eigenvalue cross-check."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .linearized import drift_matrix
from .params import PhysicalParams
from .steady_state import SteadyState

MARGINAL_RTOL = 1e-12


@dataclass(frozen=True)
class StabilityReport:
    coefficients: np.ndarray
    hurwitz_minors: np.ndarray
    stable: bool
    marginal: bool
    max_real_eigenvalue: float


def characteristic_coefficients(matrix) -> np.ndarray:
    """Coefficients ``[1, c1, ..., cn]`` of ``det(sI - A)`` from principal-minor sums."""
    a = np.asarray(matrix, dtype=float)
    n = a.shape[0]
    coeffs = [1.0]
    for k in range(1, n + 1):
        total = sum(np.linalg.det(a[np.ix_(idx, idx)]) for idx in combinations(range(n), k))
        coeffs.append((-1) ** k * total)
    return np.array(coeffs)


def hurwitz_minors(coeffs):
    """Leading principal minors of the quartic Hurwitz matrix and a magnitude scale for each.

    The scale is the sum of absolute values of the products entering each
    minor, so ``|minor| / scale`` measures how close the minor is to a
    cancellation-limited zero.
    """
    a0, a1, a2, a3, a4 = coeffs
    m1 = a1
    s1 = abs(a1)
    m2 = a1 * a2 - a0 * a3
    s2 = abs(a1 * a2) + abs(a0 * a3)
    m3 = a3 * m2 - a1 * a1 * a4
    s3 = abs(a3) * s2 + abs(a1 * a1 * a4)
    m4 = a4 * m3
    s4 = abs(a4) * s3
    return np.array([m1, m2, m3, m4]), np.array([s1, s2, s3, s4])


def eigen_check(ss: SteadyState, params: PhysicalParams) -> float:
    """Largest real part among the drift-matrix eigenvalues."""
    return float(np.max(np.linalg.eigvals(drift_matrix(ss, params)).real))


def routh_hurwitz(ss: SteadyState, params: PhysicalParams) -> StabilityReport:
    """Stability verdict for the linearised dynamics at ``ss``.

    The drift matrix is rescaled by its largest entry before forming the
    characteristic polynomial so that the coefficients are of order one.
    A minor within ``1e-12`` relative of zero is reported as marginal and
    counts as not stable.
    """
    drift = drift_matrix(ss, params)
    scale = np.max(np.abs(drift))
    if scale == 0:
        scale = 1.0
    coeffs = characteristic_coefficients(drift / scale)
    minors, magnitudes = hurwitz_minors(coeffs)
    marginal = bool(np.any(np.abs(minors) <= MARGINAL_RTOL * magnitudes))
    stable = bool(np.all(minors > 0) and not marginal)
    powers = np.arange(len(coeffs))
    return StabilityReport(
        coefficients=coeffs * scale**powers,
        hurwitz_minors=minors,
        stable=stable,
        marginal=marginal,
        max_real_eigenvalue=eigen_check(ss, params),
    )
