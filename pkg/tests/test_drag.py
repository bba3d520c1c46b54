import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate as sint

from frictionlab import RadialProfile
from frictionlab.drag import (
    DragCurve, NegligibleDragWarning, SurrogateSolution, drag_curve, drag_magnitude, exponent_for_mu,
    fit_power_law, gamma_alpha, surrogate_solve,
)
from frictionlab.errors import InsufficientDataError
from conftest import gaussian_model


def closed_form_drag(v, mu):
    # gaussian profiles, d = 1: (2 pi)^2 v^(2mu+2) Gamma(mu+2) / (2 (1+v^2)^(mu+2))
    return (2 * math.pi) ** 2 * v ** (2 * mu + 2) * math.gamma(mu + 2) / (2 * (1 + v * v) ** (mu + 2))


@given(st.floats(1e-3, 5.0), st.floats(-0.75, 1.0))
@settings(deadline=None, max_examples=30)
def test_drag_against_closed_form(v, mu):
    assert drag_magnitude(v, gaussian_model(mu=mu)) == pytest.approx(closed_form_drag(v, mu), rel=1e-8)


def test_drag_against_adaptive_quadrature():
    # independent route: scipy adaptive quadrature of the defining integral
    v, mu = 0.7, 0.25
    m = gaussian_model(mu=mu)
    f = lambda w: (v * w) ** (2 * mu + 1) * math.exp(-(v * w) ** 2) * math.sqrt(2 * math.pi) * w * w * math.exp(-w * w)
    ref = (2 * math.pi) ** 1.5 * v * sint.quad(f, 0, np.inf, epsabs=0, epsrel=1e-12)[0]
    assert drag_magnitude(v, m) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("mu", [-0.5, 0.0, 0.5])
def test_gamma_alpha_closed_form(mu):
    assert gamma_alpha(gaussian_model(mu=mu)) == pytest.approx(2 * math.pi**2 * math.gamma(mu + 2), rel=1e-9)


@given(st.floats(-0.9, 1.0))
@settings(deadline=None, max_examples=20)
def test_drag_positive_and_small_v_limit(mu):
    m = gaussian_model(mu=mu)
    v = 1e-4
    ratio = drag_magnitude(v, m) / v ** exponent_for_mu(mu) / gamma_alpha(m)
    assert drag_magnitude(0.3, m) > 0
    assert ratio == pytest.approx(1.0, abs=1e-6)


def test_drag_rejects_nonpositive_speed(model):
    with pytest.raises(ValueError):
        drag_magnitude(0.0, model)


def test_negligible_drag_warns():
    m = gaussian_model().replace(rho2_hat=RadialProfile("compact-bump", 1e-300))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        assert drag_magnitude(1.0, m) == 0.0
    assert any(issubclass(x.category, NegligibleDragWarning) for x in w)


@given(st.floats(-0.9, 1.0), st.floats(0.1, 10.0))
def test_fit_recovers_exact_power(expo, coef):
    v = np.geomspace(1e-3, 1e-2, 12)
    e, c = fit_power_law(np.column_stack([v, coef * v**expo]), (1e-3, 1e-2))
    assert e == pytest.approx(expo, abs=1e-9)
    assert c == pytest.approx(coef, rel=1e-8)


def test_fit_needs_enough_points():
    v = np.geomspace(1e-3, 1e-2, 5)
    with pytest.raises(InsufficientDataError):
        fit_power_law(np.column_stack([v, v]), (1e-3, 1e-2))


def test_drag_curve_validation(model):
    c = drag_curve(model, np.geomspace(1e-3, 1e-1, 21))
    assert c.fit_exponent == pytest.approx(2.0, abs=1e-3)
    with pytest.raises(ValueError):
        DragCurve(np.array([0.2, 0.1]), np.ones(2), 0.0, 2.0, 1.0, (0.1, 0.2))
    with pytest.raises(ValueError):
        DragCurve(np.array([0.1, 0.2]), np.ones(2), 0.0, 2.0, 1.0, (0.01, 0.2))


@given(st.floats(1.0, 4.0), st.floats(0.05, 5.0), st.floats(0.0, 50.0))
def test_surrogate_solves_ode(k, v0, t):
    sol = SurrogateSolution(k, v0)
    h = 1e-5 * (1 + t)
    dv = (sol.velocity(t + h) - sol.velocity(t + 0 * h if t == 0 else t - h)) / (h if t == 0 else 2 * h)
    assert dv == pytest.approx(-sol.velocity(t) ** k, rel=1e-3, abs=1e-12)
    dq = (sol.displacement(t + h) - sol.displacement(t)) / h
    # rounding in q(t + h) - q(t) is about eps |q| / h
    assert dq == pytest.approx(sol.velocity(t + h / 2), rel=1e-4, abs=1e-14 * (1 + abs(sol.displacement(t))) / h)
    assert sol.displacement(0.0) == pytest.approx(0.0, abs=1e-14)


@given(st.floats(1.0, 1.99), st.floats(0.1, 3.0))
def test_surrogate_finite_range(k, v0):
    sol = SurrogateSolution(k, v0)
    assert np.isfinite(sol.q_infinity)
    assert sol.displacement(1e6) < sol.q_infinity * (1 + 1e-12)


@pytest.mark.parametrize("k", [2.0, 2.5, 3.0])
def test_surrogate_unbounded(k):
    sol = SurrogateSolution(k, 1.0)
    assert sol.q_infinity == "unbounded"
    assert sol.displacement(1e8) > sol.displacement(1e4) > 0


def test_surrogate_late_slope():
    # q ~ t^((k-2)/(k-1)) for k > 2; large v0 shortens the transient
    k = 2.5
    sol = SurrogateSolution(k, 1e4)
    t = np.array([1e6, 1e7])
    s = np.diff(np.log(sol.displacement(t))) / np.diff(np.log(t))
    assert s[0] == pytest.approx((k - 2) / (k - 1), abs=0.01)


def test_surrogate_solve_and_validation():
    v, q = surrogate_solve(1.0, 2.0, 1.0)
    assert v == pytest.approx(2 * math.exp(-1))
    assert q == pytest.approx(2 * (1 - math.exp(-1)))
    with pytest.raises(ValueError):
        SurrogateSolution(0.5, 1.0)
    with pytest.raises(ValueError):
        surrogate_solve(2.0, 1.0, -1.0)


def test_exponent_for_mu():
    assert exponent_for_mu(0.0) == 2.0
    assert exponent_for_mu(-0.5) == 1.0


def test_surrogate_quadratic_drag_example():
    v, q = surrogate_solve(2.0, 1.0, 1.0)
    assert v == pytest.approx(0.5, rel=1e-14)
    assert q == pytest.approx(math.log(2.0), rel=1e-14)


@pytest.mark.parametrize("mu", [-0.5, -0.25, 0.0, 0.5])
def test_drag_rises_to_single_turning_point(mu):
    # closed form peaks where (mu + 1)(1 + v^2) = (mu + 2) v^2, i.e. v* = sqrt(mu + 1)
    m = gaussian_model(mu=mu)
    v = np.linspace(0.05, 3.0, 64)
    f = np.array([drag_magnitude(x, m) for x in v])
    centred = f[2:] - f[:-2]
    turn = int(np.argmax(centred <= 0))
    assert np.all(centred[:turn] > 0) and np.all(centred[turn:] <= 0)
    assert v[turn + 1] == pytest.approx(math.sqrt(mu + 1), abs=2 * (v[1] - v[0]))
