import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from optomech import (
    NoiseModel,
    PhysicalParams,
    UnstableBranchError,
    operating_point,
    phonon_spectrum,
    phonon_spectrum_transfer,
    photon_spectrum,
    position_variance,
    solve_steady,
    thermal_psd,
)
from optomech.linearized import bare_frequency_sq
from optomech.spectra import integration_grid, noise_correlations, spectrum_peak

from conftest import max_rel, random_operating_point

ZERO_T = NoiseModel(bath_temperature=0.0)


def psd_oracle(omega, T, params):
    mpmath.mp.dps = 40
    hbar = mpmath.mpf(params.constants.hbar)
    kB = mpmath.mpf(params.constants.kB)
    w = mpmath.mpf(omega)
    rate = mpmath.mpf(params.gamma_m) / mpmath.mpf(params.omega_m)
    return float(rate * w * (mpmath.coth(hbar * w / (2 * kB * mpmath.mpf(T))) + 1))


@pytest.mark.parametrize("T", [1e-3, 0.05, 4.0, 300.0])
@pytest.mark.parametrize("ratio", [-20.0, -1.0, -1e-3, 1e-9, 1e-3, 1.0, 20.0])
def test_thermal_psd_matches_high_precision(params, T, ratio):
    kT_over_hbar = params.constants.kB * T / params.constants.hbar
    omega = ratio * kT_over_hbar
    got = float(thermal_psd(omega, NoiseModel(T), params))
    assert got == pytest.approx(psd_oracle(omega, T, params), rel=1e-12)


def test_thermal_psd_limits(params):
    rate = params.gamma_m / params.omega_m
    kT = params.constants.kB * 300
    assert float(thermal_psd(0.0, NoiseModel(300), params)) == pytest.approx(2 * rate * kT / params.constants.hbar, rel=1e-15)
    w = np.array([-2.0, 0.0, 3.0]) * params.omega_m
    np.testing.assert_array_equal(thermal_psd(w, ZERO_T, params), [0.0, 0.0, 2 * rate * w[2]])


@settings(max_examples=100, deadline=None)
@given(ratio=st.floats(1e-6, 30.0), T=st.floats(1e-3, 1e3))
def test_thermal_psd_detailed_balance(ratio, T):
    params = PhysicalParams()
    kT_over_hbar = params.constants.kB * T / params.constants.hbar
    w = ratio * kT_over_hbar
    noise = NoiseModel(T)
    assert float(thermal_psd(-w, noise, params)) == pytest.approx(math.exp(-ratio) * float(thermal_psd(w, noise, params)), rel=1e-9)


def test_noise_correlations(params):
    c = noise_correlations(np.array([1.0, 2.0]), NoiseModel(4.0, 0.25), params)
    assert c.shape == (2, 3, 3)
    assert np.all(c[:, 1, 2] == 2 * params.kappa * 1.25)
    assert np.all(c[:, 2, 1] == 2 * params.kappa * 0.25)
    assert np.count_nonzero(c[0]) == 3


def test_phonon_spectrum_closed_form_matches_transfer():
    rng = np.random.default_rng(11)
    for _ in range(40):
        p, ss = random_operating_point(rng)
        noise = NoiseModel(10 ** rng.uniform(-3, 2.5), rng.choice([0.0, 10 ** rng.uniform(-3, 1)]))
        w = np.linspace(-3, 3, 601) * p.omega_m
        assert max_rel(phonon_spectrum_transfer(w, ss, noise, p), phonon_spectrum(w, ss, noise, p)) < 1e-8


def test_reference_branch_spectra_agree(params):
    (ss,) = solve_steady(params)
    noise = NoiseModel.from_params(params)
    w = np.linspace(-3, 3, 2001) * params.omega_m
    assert max_rel(phonon_spectrum_transfer(w, ss, noise, params), phonon_spectrum(w, ss, noise, params)) < 1e-8


def test_bare_displacement_spectrum_is_lorentzian(params, wm):
    p = params.replace(g2=20.0)
    ss = operating_point(p, G=0.0, delta=wm, photon_number=1e5)
    noise = NoiseModel(4.0, 0.3)
    w = np.linspace(-3, 3, 1001) * wm
    expected = wm**2 * thermal_psd(w, noise, p) / np.abs(bare_frequency_sq(ss, p) - w**2 - 1j * w * p.gamma_m) ** 2
    assert max_rel(phonon_spectrum(w, ss, noise, p), expected) < 1e-12


def test_photon_spectrum_vanishes_for_vacuum_input(params, wm):
    ss = operating_point(params, G=0.0, delta=wm)
    w = np.linspace(-3, 3, 101) * wm
    assert np.all(photon_spectrum(w, ss, NoiseModel(300.0, 0.0), params) == 0)


def test_thermal_photon_spectrum_without_coupling(params, wm):
    ss = operating_point(params, G=0.0, delta=0.7 * wm)
    noise = NoiseModel(300.0, 0.4)
    w = np.linspace(-3, 3, 1001) * wm
    expected = 2 * params.kappa * 0.4 / ((w + 0.7 * wm) ** 2 + params.kappa**2)
    assert max_rel(photon_spectrum(w, ss, noise, params), expected) < 1e-12


def test_photon_spectrum_methods_agree():
    rng = np.random.default_rng(12)
    for _ in range(30):
        p, ss = random_operating_point(rng)
        noise = NoiseModel(10 ** rng.uniform(-3, 2.5), rng.choice([0.0, 0.5]))
        w = np.linspace(-3, 3, 301) * p.omega_m
        a = photon_spectrum(w, ss, noise, p, method="quadratic")
        b = photon_spectrum(w, ss, noise, p, method="sum")
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))


def test_spectra_are_non_negative():
    rng = np.random.default_rng(13)
    for _ in range(40):
        p, ss = random_operating_point(rng)
        noise = NoiseModel(10 ** rng.uniform(-3, 2.5), rng.choice([0.0, 0.5]))
        w = np.linspace(-4, 4, 801) * p.omega_m
        s_q = phonon_spectrum(w, ss, noise, p)
        s_a = photon_spectrum(w, ss, noise, p)
        assert np.all(s_q >= 0)
        assert np.all(s_a >= -1e-10 * np.max(np.abs(s_a)))


def test_unstable_branch_is_rejected(params, wm):
    ss = operating_point(params, G=0.3 * wm, delta=-wm)
    noise = NoiseModel()
    for func in (phonon_spectrum, phonon_spectrum_transfer, photon_spectrum):
        with pytest.raises(UnstableBranchError):
            func(np.array([wm]), ss, noise, params)
    with pytest.raises(UnstableBranchError):
        position_variance(ss, noise, params)


def test_unknown_photon_method(params, wm):
    with pytest.raises(ValueError):
        photon_spectrum(np.array([wm]), operating_point(params, 0.0), NoiseModel(), params, method="other")


def zero_point_variance(gamma, wm):
    # (1/2 pi) int_0^inf 2 gamma wm w / ((wm^2 - w^2)^2 + gamma^2 w^2) dw, with u = w^2
    mpmath.mp.dps = 40
    g, w = mpmath.mpf(gamma), mpmath.mpf(wm)
    b, c = g**2 - 2 * w**2, w**4
    q = 4 * c - b**2
    integral = 2 / mpmath.sqrt(q) * (mpmath.pi / 2 - mpmath.atan(b / mpmath.sqrt(q)))
    return float(g * w / (2 * mpmath.pi) * integral)


def test_zero_point_variance(params, wm):
    ss = operating_point(params, G=0.0, delta=wm)
    var = position_variance(ss, ZERO_T, params)
    assert var == pytest.approx(zero_point_variance(params.gamma_m, wm), rel=1e-6)
    assert var == pytest.approx(0.5, rel=1e-4)


def test_high_temperature_equipartition(params, wm):
    ss = operating_point(params, G=0.0, delta=wm)
    var = position_variance(ss, NoiseModel(300.0), params)
    kT = params.constants.kB * 300 / (params.constants.hbar * wm)
    assert var == pytest.approx(kT + 0.5, rel=1e-3)


def test_variance_converges_under_grid_refinement(params):
    (ss,) = solve_steady(params)
    noise = NoiseModel.from_params(params)
    coarse = position_variance(ss, noise, params)
    fine = position_variance(ss, noise, params, points_per_linewidth=16)
    assert fine == pytest.approx(coarse, rel=1e-6)


def test_integration_grid_is_odd_and_symmetric(params):
    (ss,) = solve_steady(params)
    g = integration_grid(ss, params, points=100)
    assert g.size == 101 and g[0] == -g[-1]


def test_truncated_grid_warns(params, wm):
    ss = operating_point(params, G=0.0, delta=wm)
    with pytest.warns(RuntimeWarning, match="edge"):
        position_variance(ss, NoiseModel(300.0), params, grid=np.linspace(-1.05, 1.05, 20001) * wm)


def test_cooling_lowers_variance(params, wm):
    noise = NoiseModel(300.0)
    values = [position_variance(operating_point(params, G * wm, delta=wm), noise, params) for G in (0.2, 0.4, 0.6, 0.8, 1.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_peak_of_bare_spectrum(params, wm):
    ss = operating_point(params, G=0.0, delta=wm)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        loc, val = spectrum_peak(phonon_spectrum, ss, NoiseModel(300.0), params)
    assert abs(loc) == pytest.approx(wm, rel=1e-6)
    assert val == pytest.approx(float(phonon_spectrum(np.array([loc]), ss, NoiseModel(300.0), params)[0]), rel=1e-15)
    dense = np.linspace(0.999, 1.001, 20001) * wm
    assert val >= np.max(phonon_spectrum(dense, ss, NoiseModel(300.0), params)) * (1 - 1e-9)
