import math

import numpy as np
import pytest

from optomech import PhysicalParams, operating_point

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def wm(params):
    return params.omega_m


def random_operating_point(rng, stable_only=True, max_tries=1000):
    """Random admissible (params, operating point) pair in physical units.

    Frequencies span a few decades around a random omega_m; the quadratic
    stiffening enters through a random photon number.
    """
    for _ in range(max_tries):
        wm = 2 * math.pi * 10 ** rng.uniform(4, 7)
        p = PhysicalParams(
            omega_m=wm,
            gamma_m=wm * 10 ** rng.uniform(-5, -1),
            kappa=wm * 10 ** rng.uniform(-1, 1),
            g2=wm * rng.choice([0.0, 10 ** rng.uniform(-12, -8)]),
            detuning0=wm * rng.uniform(-3, 3),
        )
        n = 10 ** rng.uniform(0, 8)
        ss = operating_point(p, G=wm * 10 ** rng.uniform(-2, 0.3), delta=p.detuning0, photon_number=n)
        if ss.stable or not stable_only:
            return p, ss
    raise RuntimeError("no admissible draw found")


def companion_roots(params):
    """Independent oracle: hand-expanded quintic, explicit companion matrix, no polishing."""
    d = params.derived
    w, k, D0, gm, g2, e2 = params.omega_m, params.kappa, params.detuning0, d.g_m, params.g2, d.epsilon_p**2
    # ascending coefficients of w q (k^2 + (D0 - gm q + g2 q^2)^2) - e2 (gm - 2 g2 q)
    c = [
        -e2 * gm,
        w * (D0**2 + k**2) + 2 * e2 * g2,
        -2 * w * gm * D0,
        w * (gm**2 + 2 * g2 * D0),
        -2 * w * g2 * gm,
        w * g2**2,
    ]
    while c[-1] == 0:
        c.pop()
    n = len(c) - 1
    comp = np.zeros((n, n))
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -np.array(c[:-1]) / c[-1]
    roots = np.linalg.eigvals(comp)
    real = roots[np.abs(roots.imag) < 1e-6 * (1 + np.abs(roots.real))].real
    # photon number n = omega_m q / (g_m - 2 g2 q) must be non-negative
    physical = [q for q in real if q == 0 or (q > 0) == (gm - 2 * g2 * q > 0)]
    return np.sort(physical)


def max_rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.abs(b)))
