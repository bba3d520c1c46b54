import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from frictionlab import FormFactorModel, RadialProfile
from frictionlab.errors import InfraredSingularError
from frictionlab.formfactor import (
    classical_ground_energy_E0, coupling_h, eta_integral, hat_K, rho1_norm_sq, sigma2_hat, sphere_area,
    static_field_psi_q,
)
from conftest import gaussian_model


def test_profile_validation():
    with pytest.raises(ValueError):
        RadialProfile("square")
    with pytest.raises(ValueError):
        RadialProfile("gaussian", scale=0.0)
    with pytest.raises(ValueError):
        RadialProfile("table", radii=(0.0, 1.0, 0.5), values=(1.0, 0.5, 0.0))


def test_model_validation():
    with pytest.raises(ValueError):
        gaussian_model(mu=-1.0)
    with pytest.raises(ValueError):
        FormFactorModel(d=0)
    with pytest.raises(ValueError):
        FormFactorModel(membrane_dim=2)


def test_compact_bump_vanishes_outside():
    b = RadialProfile("compact-bump", 2.0)
    s = np.array([0.0, 1.0, 1.999, 2.0, 3.0])
    v = b(s)
    assert v[0] == pytest.approx(1.0)
    assert np.all(v[3:] == 0.0)
    assert b.support() == 2.0


@given(st.floats(0.01, 4.0), st.sampled_from(["gaussian", "compact-bump"]))
def test_profile_derivative_matches_finite_difference(s, kind):
    prof = RadialProfile(kind, 5.0)
    h = 1e-6
    fd = (prof(s + h) - prof(s - h)) / (2 * h)
    assert np.isclose(prof.derivative(s), fd, rtol=1e-5, atol=1e-8)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_infrared_guards():
    m = gaussian_model(mu=-0.75)
    with pytest.raises(InfraredSingularError):
        sigma2_hat(0.0, m)
    with pytest.raises(InfraredSingularError):
        coupling_h(0.0, 0.0, 0.0, m)
    with pytest.raises(InfraredSingularError):
        static_field_psi_q(0.0, 0.0, 0.0, gaussian_model())
    assert sigma2_hat(0.0, gaussian_model(mu=0.0)) == 0.0


@given(st.floats(-5, 5), st.floats(0.01, 5), st.floats(-5, 5), st.floats(-0.5, 1.0))
def test_coupling_modulus_independent_of_position(q, k, xi, mu):
    m = gaussian_model(mu=mu)
    assert np.isclose(abs(coupling_h(q, k, xi, m)), abs(coupling_h(0.0, k, xi, m)), rtol=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_rho1_norm_gaussian(d):
    # int_{R^d} exp(-|xi|^2) = pi^(d/2)
    assert rho1_norm_sq(gaussian_model(d=d)) == pytest.approx(math.pi ** (d / 2), rel=1e-10)


@given(st.floats(0.0, 4.0))
@settings(deadline=None, max_examples=25)
def test_eta_integral_gaussian_closed_form(w):
    # d = 3: int_{R^2} exp(-(w^2 + |eta|^2)) = pi exp(-w^2)
    assert np.isclose(eta_integral(w, gaussian_model(d=3)), math.pi * math.exp(-w * w), rtol=1e-10)


def test_kernel_nonpositive_and_zero_at_origin(model):
    w = np.linspace(0, 5, 11)
    K = hat_K(w, model)
    assert K[0] == 0.0
    assert np.all(K <= 0)


@given(st.floats(-0.9, 1.5), st.floats(0.1, 3.0))
@settings(deadline=None, max_examples=30)
def test_E0_against_gamma_oracle(mu, g):
    # gaussian profiles: -g^2 (sqrt(pi)/2) 4 pi Gamma(mu + 1) / 2
    expected = -g * g * 0.5 * math.sqrt(math.pi) * 2.0 * math.pi * math.gamma(mu + 1.0)
    assert classical_ground_energy_E0(gaussian_model(mu=mu, g=g)) == pytest.approx(expected, rel=1e-9)


def test_E0_zero_coupling():
    assert classical_ground_energy_E0(gaussian_model(g=0.0)) == 0.0


@given(st.floats(-10, 10), st.floats(0.01, 6), st.floats(-6, 6), st.floats(-0.9, 1.5))
def test_source_reality(q, k, xi, mu):
    # Hermitian symmetry in xi, so the source is a real function of x
    m = gaussian_model(mu=mu)
    h, hm = coupling_h(q, k, xi, m), coupling_h(q, k, -xi, m)
    assert abs(hm - np.conj(h)) <= 1e-14 * max(abs(h), 1e-300)
    assert abs((h * hm).imag) <= 1e-14 * abs(h) ** 2
