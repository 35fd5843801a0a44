"""Self-consistent operating points of the driven cavity.

Setting the time derivatives of the mean-field equations to zero and
eliminating the intracavity photon number gives a real polynomial in the
mechanical displacement quadrature ``q``::

    omega_m * q * (kappa**2 + Delta(q)**2) = epsilon_p**2 * (g_m - 2 g2 q)
    Delta(q) = detuning0 - g_m q + g2 q**2

which is quintic in ``q`` (cubic when ``g2 == 0``). Every real root is a
steady-state branch; several coexist in the bistable regime.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DegenerateBranchError, SolverFailure
from .params import PhysicalParams

log = logging.getLogger(__name__)

IMAG_TOL = 1e-8
NEWTON_RTOL = 1e-12
RESIDUAL_TOL = 1e-9
POLE_RTOL = 1e-12


@dataclass(frozen=True)
class SteadyState:
    """One fixed point of the mean-field equations.

    The drive phase is chosen so that ``a_s`` is real and non-negative; the
    effective coupling ``G = (g_m - 2 g2 q_s) a_s`` is then real as well.
    ``stable`` is None until a stability verdict has been attached.
    """

    q_s: float
    a_s: complex
    photon_number: float
    delta_eff: float
    G: float
    p_s: float = 0.0
    stable: bool | None = None

    def replace(self, **changes) -> SteadyState:
        return dataclasses.replace(self, **changes)


def steady_polynomial(params: PhysicalParams) -> Polynomial:
    """Reduced steady-state polynomial in q, divided through by ``omega_m**3``."""
    d = params.derived
    w = params.omega_m
    kappa, det0, g_m, g2 = params.kappa / w, params.detuning0 / w, d.g_m / w, params.g2 / w
    eps2 = (d.epsilon_p / w) ** 2
    q = Polynomial([0.0, 1.0])
    delta = det0 - g_m * q + g2 * q**2
    return q * (kappa**2 + delta**2) - eps2 * (g_m - 2 * g2 * q)


def _detuning(q, params):
    return params.detuning0 - params.derived.g_m * q + params.g2 * q * q


def _polish(q, params, max_iter=60):
    """Newton iterations on the two-variable fixed-point system (q, n)."""
    d = params.derived
    g_m, g2, kappa, w = d.g_m, params.g2, params.kappa, params.omega_m
    eps2 = d.epsilon_p**2
    n = eps2 / (kappa**2 + _detuning(q, params) ** 2)

    def scaled(q, n):
        delta = _detuning(q, params)
        f1 = n * (kappa**2 + delta**2) - eps2
        f2 = q * (w + 2 * g2 * n) - g_m * n
        s2 = w * abs(q) + abs(g_m) * n + 2 * abs(g2) * n * abs(q)
        return f1, f2, max(abs(f1) / eps2, abs(f2) / s2 if s2 > 0 else abs(f2))

    f1, f2, err = scaled(q, n)
    for _ in range(max_iter):
        if err < NEWTON_RTOL:
            break
        delta = _detuning(q, params)
        jac = np.array(
            [
                [2 * n * delta * (-g_m + 2 * g2 * q), kappa**2 + delta**2],
                [w + 2 * g2 * n, 2 * g2 * q - g_m],
            ]
        )
        try:
            dq, dn = np.linalg.solve(jac, [-f1, -f2])
        except np.linalg.LinAlgError:
            break
        q_new, n_new = q + dq, n + dn
        f1_new, f2_new, err_new = scaled(q_new, n_new)
        if not err_new < err:
            break
        q, n, f1, f2, err = q_new, n_new, f1_new, f2_new, err_new
    return q, n


def epsilon_phasor(state: SteadyState, params: PhysicalParams) -> complex:
    """Complex drive amplitude whose phase makes the stored ``a_s`` real."""
    eps = params.derived.epsilon_p
    kappa, delta = params.kappa, state.delta_eff
    return eps * complex(kappa, delta) / math.hypot(kappa, delta)


def residual(state: SteadyState, params: PhysicalParams, normalized=False) -> np.ndarray:
    """Right-hand sides of the noiseless mean-field equations at ``state``.

    Returns ``[Re(da/dt), Im(da/dt), dp/dt, dq/dt]``; the equation for the
    conjugate amplitude carries no extra information. With
    ``normalized=True`` each entry is divided by the sum of magnitudes of
    the terms in its equation, giving a dimensionless relative residual.
    """
    d = params.derived
    a, q, p = complex(state.a_s), state.q_s, state.p_s
    w, g_m, g2, kappa, gamma = params.omega_m, d.g_m, params.g2, params.kappa, params.gamma_m
    eps = epsilon_phasor(state, params)
    n = abs(a) ** 2

    terms_a = (-kappa * a, -1j * params.detuning0 * a, 1j * g_m * a * q, -1j * g2 * a * q * q, eps)
    terms_p = (-gamma * p, -w * q, g_m * n, -2 * g2 * n * q)
    ra = sum(terms_a)
    rp = sum(terms_p)
    rq = w * p
    out = np.array([ra.real, ra.imag, rp, rq])
    if normalized:
        scales = np.array(
            [
                sum(abs(t) for t in terms_a),
                sum(abs(t) for t in terms_a),
                sum(abs(t) for t in terms_p),
                w * max(abs(p), 1.0),
            ]
        )
        scales[scales == 0] = 1.0
        out = out / scales
    return out


def effective_coupling(q_s, photon_number, params: PhysicalParams) -> float:
    """Linearised coupling ``G = (g_m - 2 g2 q_s) |a_s|`` for a real, non-negative ``a_s``."""
    return (params.derived.g_m - 2 * params.g2 * q_s) * math.sqrt(photon_number)


def _make_state(q, n, params):
    n = max(n, 0.0)
    return SteadyState(
        q_s=float(q),
        a_s=complex(math.sqrt(n), 0.0),
        photon_number=float(n),
        delta_eff=float(_detuning(q, params)),
        G=float(effective_coupling(q, n, params)),
    )


def _attach_stability(state, params):
    from .stability import routh_hurwitz

    return state.replace(stable=routh_hurwitz(state, params).stable)


def solve_steady(params: PhysicalParams) -> list[SteadyState]:
    """All physical steady-state branches, sorted by ``q_s`` ascending.

    Roots of the reduced polynomial come from companion-matrix eigenvalues
    and are then polished by Newton iteration on the full (q, n) system.
    Each branch carries a Routh-Hurwitz stability verdict.
    """
    d = params.derived
    if d.epsilon_p == 0:
        return [_attach_stability(_make_state(0.0, 0.0, params), params)]

    poly = steady_polynomial(params).trim()
    roots = poly.roots() if poly.degree() > 0 else np.array([])
    candidates = [r.real for r in np.atleast_1d(roots) if abs(r.imag) < IMAG_TOL * (1 + abs(r.real))]

    pole = d.g_m / (2 * params.g2) if params.g2 != 0 else None
    branches = []
    dropped = 0
    for q0 in candidates:
        q, n = _polish(q0, params)
        if pole is not None and pole != 0 and abs(q - pole) <= POLE_RTOL * abs(pole):
            raise DegenerateBranchError(f"root q={q!r} coincides with the pole q={pole!r}")
        denom = d.g_m - 2 * params.g2 * q
        if denom != 0 and q != 0 and (q > 0) != (denom > 0):
            dropped += 1
            continue
        state = _make_state(q, n, params)
        if np.max(np.abs(residual(state, params, normalized=True))) >= RESIDUAL_TOL:
            dropped += 1
            continue
        if any(abs(state.q_s - b.q_s) <= 1e-9 * max(1.0, abs(b.q_s)) for b in branches):
            continue
        branches.append(state)
    if dropped:
        log.info("discarded %d unphysical or unconverged steady-state root(s)", dropped)
    if not branches:
        raise SolverFailure("no physical steady-state branch found")
    branches.sort(key=lambda s: s.q_s)
    return [_attach_stability(b, params) for b in branches]


def select_branch(branches: list[SteadyState], index="auto") -> SteadyState:
    """Pick one branch: by index, or the stable branch with smallest ``|q_s|``."""
    if index != "auto":
        return branches[int(index)]
    stable = [b for b in branches if b.stable]
    if not stable:
        raise SolverFailure("all steady-state branches are unstable")
    return min(stable, key=lambda s: abs(s.q_s))


def operating_point(params: PhysicalParams, G: float, delta=None, photon_number=0.0) -> SteadyState:
    """Synthetic operating point with the coupling ``G`` set directly.

    Used for sweeps that fix the effective coupling instead of the laser
    power. ``delta`` defaults to ``params.detuning0``; ``photon_number`` only
    enters through the quadratic-coupling stiffness ``2 g2 n``.
    """
    state = SteadyState(
        q_s=0.0,
        a_s=complex(math.sqrt(photon_number), 0.0),
        photon_number=float(photon_number),
        delta_eff=float(params.detuning0 if delta is None else delta),
        G=float(G),
    )
    return _attach_stability(state, params)
