import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clockspin.fitting import (DecayCurve, FitError, fit_stretched_exponential, fit_t2_vs_field, resonator_q,
                               stretched_exponential, stretched_exponential_jacobian, t2_law, t2_law_jacobian)

from oracles import central_jacobian

TRUE_LAW = (10.3e-3, 1.48e6, 14.1e-6)


def kink_design():
    """Field samples: sparse wings, dense around the kink."""
    return np.unique(np.r_[np.linspace(-300e-6, -30e-6, 10), np.arange(-20e-6, 50.1e-6, 2e-6),
                           np.linspace(60e-6, 400e-6, 12)])


def test_noiseless_exponential_recovered_exactly():
    tau = np.linspace(0, 15e-3, 40)
    fit = fit_stretched_exponential(DecayCurve(tau, stretched_exponential(tau, 1.0, 5e-3, 1.0)))
    assert fit.T2 == pytest.approx(5e-3, rel=1e-8)
    assert fit.m == pytest.approx(1.0, rel=1e-8)
    assert fit.E0 == pytest.approx(1.0, rel=1e-8)
    assert fit.success


def test_ten_millisecond_decay_within_its_uncertainty():
    # T2 = 10 ms with 4% multiplicative scatter; recovered within 0.4 ms
    rng = np.random.default_rng(11)
    tau = np.linspace(0, 20e-3, 80)
    y = stretched_exponential(tau, 1.0, 10.0e-3, 1.0) * (1 + 0.04 * rng.standard_normal(tau.size))
    fit = fit_stretched_exponential(DecayCurve(tau, y))
    assert abs(fit.T2 - 10.0e-3) <= 0.4e-3
    assert fit.stderr[1] > 0


def test_fit_is_deterministic():
    rng = np.random.default_rng(5)
    tau = np.linspace(0, 20e-3, 50)
    y = stretched_exponential(tau, 1, 8e-3, 1.5) + 0.02 * rng.standard_normal(tau.size)
    a = fit_stretched_exponential(DecayCurve(tau, y))
    b = fit_stretched_exponential(DecayCurve(tau.copy(), y.copy()))
    assert a.params() == b.params()
    assert np.array_equal(a.covariance, b.covariance)


def test_optimum_beats_generating_parameters():
    rng = np.random.default_rng(3)
    tau = np.linspace(0, 20e-3, 60)
    truth = (1.0, 10e-3, 1.2)
    y = stretched_exponential(tau, *truth) + 0.02 * rng.standard_normal(tau.size)
    fit = fit_stretched_exponential(DecayCurve(tau, y))
    r_fit = np.linalg.norm(stretched_exponential(tau, fit.E0, fit.T2, fit.m) - y)
    r_true = np.linalg.norm(stretched_exponential(tau, *truth) - y)
    assert r_fit <= r_true
    assert fit.residual_norm == pytest.approx(r_fit, rel=1e-9)

    b = kink_design()
    y = t2_law(b, *TRUE_LAW) * (1 + 0.05 * rng.standard_normal(b.size))
    fit = fit_t2_vs_field(b, y)
    assert np.linalg.norm(t2_law(b, fit.t2_zero, fit.kappa, fit.b0) - y) <= np.linalg.norm(
        t2_law(b, *TRUE_LAW) - y)


def test_weights_are_used():
    tau = np.linspace(0, 20e-3, 30)
    y = stretched_exponential(tau, 1, 10e-3, 1.0)
    y_bad = y.copy()
    y_bad[5] += 0.3
    sigma = np.full(tau.size, 0.01)
    sigma[5] = 1e3
    weighted = fit_stretched_exponential(DecayCurve(tau, y_bad, sigma))
    plain = fit_stretched_exponential(DecayCurve(tau, y_bad))
    assert abs(weighted.T2 - 10e-3) < abs(plain.T2 - 10e-3)
    assert weighted.T2 == pytest.approx(10e-3, rel=1e-4)


def test_mean_bias_is_small():
    rng = np.random.default_rng(99)
    tau = np.linspace(0, 20e-3, 100)
    errs = []
    for _ in range(100):
        y = stretched_exponential(tau, 1, 10e-3, 1.2) + 0.02 * rng.standard_normal(tau.size)
        errs.append(fit_stretched_exponential(DecayCurve(tau, y)).T2 / 10e-3 - 1)
    assert abs(np.mean(errs)) < 0.02


def test_decay_curve_validation():
    with pytest.raises(FitError):
        DecayCurve([0, 2, 1], [1, 0.5, 0.2])
    with pytest.raises(FitError):
        DecayCurve([0, 1], [1])
    with pytest.raises(FitError):
        DecayCurve([0, 1, 2], [1, 0.5, 0.2], [0.1, 0, 0.1])
    with pytest.raises(FitError, match="at least 5"):
        fit_stretched_exponential(DecayCurve([0, 1e-3, 2e-3], [1, 0.8, 0.6]))
    with pytest.raises(FitError, match="constant"):
        fit_stretched_exponential(DecayCurve(np.arange(6.0), np.ones(6)))


def test_constant_t2_gives_zero_kappa():
    b = np.linspace(-200e-6, 200e-6, 15)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        fit = fit_t2_vs_field(b, np.full(b.size, 10.3e-3))
    assert fit.t2_zero == pytest.approx(10.3e-3, rel=1e-9)
    assert fit.kappa == pytest.approx(0.0, abs=1e-3)


def test_one_sided_data_fixes_b0():
    b = np.linspace(50e-6, 400e-6, 12)
    y = t2_law(b, *TRUE_LAW)
    with pytest.warns(UserWarning, match="B0 fixed"):
        fit = fit_t2_vs_field(b, y)
    assert fit.b0_fixed and fit.b0 == 0.0
    with pytest.raises(FitError):
        fit_t2_vs_field(b[:3], y[:3])


def test_noiseless_t2_law_recovered():
    b = kink_design()
    fit = fit_t2_vs_field(b, t2_law(b, *TRUE_LAW))
    assert np.allclose([fit.t2_zero, fit.kappa, fit.b0], TRUE_LAW, rtol=1e-6)


def test_t2_fit_unit_invariance():
    rng = np.random.default_rng(4)
    b = kink_design()
    y = t2_law(b, *TRUE_LAW) * (1 + 0.05 * rng.standard_normal(b.size))
    si = fit_t2_vs_field(b, y)
    # fields in uT, times in ms; kappa then comes out in 1/(ms uT) = 1e9 Hz/T
    mixed = fit_t2_vs_field(b * 1e6, y * 1e3)
    assert mixed.t2_zero * 1e-3 == pytest.approx(si.t2_zero, rel=1e-9)
    assert mixed.kappa * 1e9 == pytest.approx(si.kappa, rel=1e-9)
    assert mixed.b0 * 1e-6 == pytest.approx(si.b0, rel=1e-9)


def test_large_field_asymptote():
    t20, kappa, b0 = TRUE_LAW
    # relative error of the asymptote is 1/(1 + pi kappa T2(0) |B - B0|)
    for mult in (50, 100, 400):
        d = mult / (np.pi * kappa * t20)
        exact = t2_law(b0 + d, t20, kappa, b0)
        assert abs(exact * np.pi * kappa * d - 1) <= 0.02


def test_resonator_q():
    assert resonator_q(2497e6, 4.5e6) == pytest.approx(555, abs=1)
    assert resonator_q(3e9, 3e9) == 1.0
    assert resonator_q(2497e6, 9e6) == pytest.approx(resonator_q(2497e6, 4.5e6) / 2)
    with pytest.raises(ValueError):
        resonator_q(1e9, 0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.2, 5), st.floats(1e-4, 1e-1), st.floats(0.5, 4))
def test_stretched_jacobian_matches_finite_differences(e0, t2, m):
    tau = np.linspace(0, 3 * t2, 25)
    p = np.array([e0, t2, m])
    num = central_jacobian(lambda q: stretched_exponential(tau, *q), p)
    ana = stretched_exponential_jacobian(tau, *p)
    assert np.allclose(ana, num, rtol=1e-6, atol=1e-6 * np.abs(ana).max())


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e-1), st.floats(1e4, 1e7), st.floats(-1e-4, 1e-4))
def test_t2_jacobian_matches_finite_differences(t20, kappa, b0):
    b = np.linspace(-5e-4, 5e-4, 31)
    b = b[np.abs(b - b0) > 1e-6]  # the kink itself has no derivative
    p = np.array([t20, kappa, b0])
    num = central_jacobian(lambda q: t2_law(b, *q), p, rel=1e-7, scale=[1e-3, 1e4, 1e-4])
    ana = t2_law_jacobian(b, *p)
    assert np.allclose(ana, num, rtol=1e-6, atol=1e-6 * np.abs(ana).max())
