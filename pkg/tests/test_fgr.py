import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from frictionlab.errors import EpsilonUnderResolved
from frictionlab.fgr import (
    FgrCurve, c_lorentzian, c_monte_carlo, c_of_P, c_small_P_exponent, extrapolate_eps, fgr_curve, is_unimodal,
    lorentzian_selfenergy, small_P_exponent_oracle,
)
from conftest import gaussian_model


def quad_c_1d(P, mu):
    e = 2 + 2 * mu
    f = lambda x: (2 * P * x - x * x) ** e * math.exp(-x * x) * math.exp(-((2 * P * x - x * x) ** 2))
    return 4 * math.pi**2 * sint.quad(f, 0, 2 * P, epsabs=0, epsrel=1e-12, limit=200)[0]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_zero_at_rest(d):
    assert c_of_P(np.zeros(d), gaussian_model(d=d)) == 0.0


@given(st.floats(0.05, 6.0), st.floats(-0.5, 1.0))
@settings(deadline=None, max_examples=30)
def test_one_dimension_against_adaptive_quadrature(P, mu):
    assert c_of_P(P, gaussian_model(mu=mu)) == pytest.approx(quad_c_1d(P, mu), rel=1e-8)


@given(st.floats(0.1, 3.0), st.floats(0, 2 * math.pi), st.floats(0, math.pi), st.sampled_from([2, 3]))
@settings(deadline=None, max_examples=20)
def test_rotation_invariance(p, phi, theta, d):
    m = gaussian_model(d=d)
    if d == 2:
        P = p * np.array([math.cos(phi), math.sin(phi)])
    else:
        P = p * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    assert c_of_P(P, m) == pytest.approx(c_of_P(np.r_[p, np.zeros(d - 1)], m), rel=1e-10)


@pytest.mark.parametrize("d,mu", [(2, 0.0), (3, 0.5)])
def test_higher_dimensions_against_monte_carlo(d, mu):
    m = gaussian_model(d=d, mu=mu)
    P = np.r_[1.0, np.zeros(d - 1)]
    mean, err = c_monte_carlo(P, m, n_samples=400_000, seed=7)
    assert abs(c_of_P(P, m) - mean) < 5 * err


def test_monte_carlo_validates_dimension():
    with pytest.raises(ValueError):
        c_monte_carlo(np.ones(2), gaussian_model(d=3), n_samples=10)


@pytest.mark.parametrize("d,mu", [(1, 0.0), (2, -0.25), (3, 0.5)])
def test_small_P_exponent(d, mu):
    m = gaussian_model(d=d, mu=mu)
    assert c_small_P_exponent(m) == pytest.approx(small_P_exponent_oracle(m), abs=0.05)


def test_lorentzian_agrees_with_delta():
    m = gaussian_model(mu=0.0)
    val, vals = c_lorentzian(1.0, m)
    assert len(vals) == 3
    assert val == pytest.approx(c_of_P(1.0, m), rel=1e-3)


def test_lorentzian_resolution_guard():
    with pytest.raises(EpsilonUnderResolved):
        lorentzian_selfenergy(1.0, 1.0, 1e-9, gaussian_model(), n=8)
    with pytest.raises(ValueError):
        lorentzian_selfenergy(1.0, 1.0, 0.0, gaussian_model())


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_extrapolation_exact_for_quadratics(coef):
    eps = np.array([1e-1, 1e-2, 1e-3])
    vals = np.polyval(coef, eps)
    assert extrapolate_eps(eps, vals) == pytest.approx(coef[-1], abs=1e-9)


def test_unimodality_helper():
    assert is_unimodal([0, 1, 3, 2, 1])
    assert not is_unimodal([0, 1, 2, 3])
    assert not is_unimodal([0, 2, 1, 2, 0])


@pytest.mark.parametrize("mu", [-0.25, 0.0, 0.5, 1.0])
def test_gaussian_curves_unimodal_with_slow_tail(mu):
    P = np.linspace(0, 8, 33)
    c = fgr_curve(P, gaussian_model(mu=mu)).c
    assert c[0] == 0.0
    assert is_unimodal(c)
    # beyond the peak c decays monotonically and P c(P) levels off
    tail = c[P >= 4]
    assert np.all(np.diff(tail) < 0)
    pc = P[-4:] * c[-4:]
    assert np.ptp(pc) / pc.mean() < 0.1


def test_curve_validation():
    with pytest.raises(ValueError):
        FgrCurve(np.array([0.0, 1.0]), np.array([0.1, 1.0]), 0.0, 1, "", "delta")
    with pytest.raises(ValueError):
        fgr_curve([1.0], gaussian_model(), method="bogus")
