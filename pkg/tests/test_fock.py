import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from frictionlab.errors import CouplingRegimeError, DimensionCapExceeded
from frictionlab.fock import (
    FockBasis, FockOperator, SingleBosonGrid, assemble_H, assemble_N, assemble_Phi, creation_operator,
    free_diagonal, i_a_h0, ir_amplitude, lowest_eigenpair, mourre_check, pt2_energy, spectral_report,
    vacuum_projector,
)
from conftest import gaussian_model

TINY = SingleBosonGrid.log_grid(k_min=0.25, k_max=4.0, ratio=2.0, xi_step=1.0, xi_max=1.0)


def test_log_grid_nodes_anchor_at_one():
    g = SingleBosonGrid.log_grid(k_min=0.1, k_max=6.0, ratio=2.0, xi_step=0.5, xi_max=1.0)
    ks = np.unique(g.k)
    assert np.allclose(np.log2(ks), np.round(np.log2(ks)))
    assert g.k_min >= 0.1 and g.xi_max == 1.0
    assert g.n_modes == g.n_k * g.n_xi
    # radial weights are 4 pi k^3 ln(ratio) times the xi step
    assert np.allclose(g.weights, 4 * math.pi * g.k**3 * math.log(2.0) * 0.5)


@given(st.integers(1, 9), st.integers(0, 4))
@settings(deadline=None, max_examples=30)
def test_basis_dimension_and_ranks(B, n_max):
    b = FockBasis(B, n_max)
    assert b.dimension == sum(math.comb(B + n - 1, n) for n in range(n_max + 1))
    for i in range(b.dimension):
        s = b.state(i)
        if s:
            assert b.index(np.array([sorted(s)]))[0] == i
    assert np.array_equal(np.bincount(b.number()), b.sizes)


def test_dimension_cap():
    with pytest.raises(DimensionCapExceeded):
        FockBasis(200, 4, cap=10_000)


@given(st.integers(0, 10**6))
@settings(deadline=None, max_examples=20)
def test_canonical_commutator_below_truncation(seed):
    r = np.random.default_rng(seed)
    f = r.standard_normal(TINY.n_modes) + 1j * r.standard_normal(TINY.n_modes)
    b = FockBasis(TINY.n_modes, 3)
    A = creation_operator(b, TINY, f)
    comm = (A.conj().T @ A - A @ A.conj().T).toarray()
    keep = b.number() < 3
    expected = np.sum(TINY.weights * np.abs(f) ** 2)
    assert np.allclose(comm[np.ix_(keep, keep)], expected * np.eye(keep.sum()), atol=1e-10 * expected)


@given(st.floats(-2, 2), st.floats(-1, 1), st.floats(-0.5, 1.0))
@settings(deadline=None, max_examples=20)
def test_hamiltonian_hermitian_and_free_limit(P, g, mu):
    m = gaussian_model(mu=mu, g=g)
    H = assemble_H(P, m, TINY, 2)
    assert H.hermiticity_error() < 1e-14
    b = FockBasis(TINY.n_modes, 2)
    H0 = assemble_H(P, m.replace(g=0.0), TINY, 2, b)
    assert np.allclose(H0.matrix.diagonal(), free_diagonal(P, b, TINY))
    assert H0.matrix.nnz <= b.dimension


@given(st.floats(-1.5, 1.5), st.floats(0.0, 1.0), st.integers(1, 3))
@settings(deadline=None, max_examples=25)
def test_lowest_eigenpair_matches_dense(P, g, n_max):
    H = assemble_H(P, gaussian_model(g=g), TINY, n_max)
    res = lowest_eigenpair(H, dense_max=0)
    ref = np.linalg.eigvalsh(H.to_dense())[0]
    assert res.energy == pytest.approx(ref, abs=1e-9)
    assert res.residual < 1e-8


def test_secular_solver_used_for_one_boson():
    H = assemble_H(0.3, gaussian_model(g=0.5), TINY, 1)
    res = lowest_eigenpair(H)
    assert res.method == "secular"
    assert res.energy == pytest.approx(np.linalg.eigvalsh(H.to_dense())[0], abs=1e-12)


def test_exact_zero_eigenvalue_found():
    H = FockOperator(sp.diags(np.r_[0.0, np.linspace(0.125, 5, 3000)], format="csr"), "diag")
    assert lowest_eigenpair(H, dense_max=0).energy == pytest.approx(0.0, abs=1e-10)


def test_triplet_roundtrip(tmp_path):
    H = assemble_H(0.5, gaussian_model(g=0.3), TINY, 2)
    path = tmp_path / "h.txt"
    H.dump_triplets(path)
    back = FockOperator.load_triplets(path)
    assert back.label == H.label
    assert abs(back.matrix - H.matrix).max() == 0.0


def test_norm_estimate_bounds_spectrum():
    H = assemble_H(0.2, gaussian_model(g=0.4), TINY, 2)
    assert np.max(np.abs(np.linalg.eigvalsh(H.to_dense()))) <= H.norm_estimate() * (1 + 1e-12)


def test_ground_state_below_zero_and_report():
    grid = SingleBosonGrid.log_grid(0.25, 4.0, 2.0, 0.5, 2.0)
    b = FockBasis(grid.n_modes, 2)
    res = lowest_eigenpair(assemble_H(0.0, gaussian_model(g=0.3), grid, 2, b))
    assert res.energy < 0
    rep = spectral_report(res, b)
    assert sum(rep.sector_norms) == pytest.approx(1.0)
    assert rep.vacuum_overlap == pytest.approx(rep.sector_norms[0])


def test_second_order_energy_is_small_coupling_limit():
    grid = SingleBosonGrid.log_grid(0.25, 4.0, 2.0, 0.5, 2.0)
    errs = []
    for g in (0.02, 0.01):
        m = gaussian_model(g=g)
        e = lowest_eigenpair(assemble_H(0.0, m, grid, 2)).energy
        errs.append(abs(e - pt2_energy(0.0, m, grid).real))
    assert errs[0] / errs[1] == pytest.approx(16.0, rel=0.05)


def test_pt2_imaginary_part_on_shell():
    grid = SingleBosonGrid.log_grid(0.25, 4.0, 2.0, 0.5, 2.0)
    m = gaussian_model(g=0.1)
    assert pt2_energy(0.0, m, grid).imag == 0.0
    assert pt2_energy(1.0, m, grid).imag < 0.0


def test_ir_amplitude_close_to_perturbative_sum():
    grid = SingleBosonGrid.log_grid(0.01, 6.0, 2.0, 0.5, 2.0)
    norm, pt = ir_amplitude(gaussian_model(g=1e-5), grid)
    assert norm == pytest.approx(pt, rel=1e-6)


def test_ia_h0_matches_finite_difference():
    m = gaussian_model(mu=1.0)
    k = np.array([0.3, 1.0, 2.5])
    grid = SingleBosonGrid.from_nodes(k, np.zeros(3), np.ones(3))
    h = 1e-6
    fd = -((k + h) * (k + h) * np.exp(-(k + h) ** 2 / 2) - (k - h) * (k - h) * np.exp(-(k - h) ** 2 / 2)) / (2 * h) / k
    assert np.allclose(i_a_h0(m, grid), fd, rtol=1e-7)


def test_mourre_bound_and_regime():
    grid = SingleBosonGrid.log_grid(0.25, 4.0, 2.0, 0.5, 2.0)
    m = gaussian_model(mu=1.0)
    assert mourre_check(m, grid, 2, g=0.0).lambda_min == pytest.approx(1.0)
    rep = mourre_check(m, grid, 2, g=0.05)
    assert rep.holds and rep.margin > 0
    with pytest.raises(CouplingRegimeError):
        mourre_check(m, grid, 2, g=1.0)


def test_operator_building_blocks():
    b = FockBasis(TINY.n_modes, 2)
    N = assemble_N(b).matrix.diagonal()
    assert np.array_equal(N, b.number())
    assert vacuum_projector(b).matrix.nnz == 1
    Phi = assemble_Phi(b, TINY, np.ones(TINY.n_modes))
    assert Phi.hermiticity_error() == 0.0
