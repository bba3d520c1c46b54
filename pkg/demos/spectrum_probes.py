"""
The quantum fiber Hamiltonian on a truncated Fock space
=======================================================

At fixed total momentum P the particle plus bosons reduce to an operator
on boson Fock space. A log-spaced grid of boson momenta and a cap on the
boson number make it a sparse matrix whose bottom we compute.
"""

# %%
import numpy as np

from frictionlab import FormFactorModel, RadialProfile
from frictionlab.fock import (
    FockBasis, SingleBosonGrid, assemble_H, flatness_probe, ir_ground_state_probe, lowest_eigenpair,
    mourre_check, pt2_energy, spectral_report,
)

profile = RadialProfile("gaussian", 1.0)
grid = SingleBosonGrid.log_grid(0.05, 6.0, 1.5, 0.5, 4.0)
basis = FockBasis(grid.n_modes, 2)
print(f"{grid.n_modes} boson modes, {basis.dimension} Fock states with at most two bosons")

# %%
# Ground state at rest against second-order perturbation theory.
for g in (0.025, 0.05, 0.1, 0.2):
    model = FormFactorModel(profile, profile, g=g)
    res = lowest_eigenpair(assemble_H(0.0, model, grid, 2, basis))
    rep = spectral_report(res, basis)
    print(f"g = {g:<6} E = {res.energy:+.6e}  second order {pt2_energy(0.0, model, grid).real:+.6e}  "
          f"mean boson number {rep.mean_number:.2e}  ({res.method})")

# %%
# Moving the particle costs less and less energy as soft bosons are resolved.
model = FormFactorModel(profile, profile, g=0.2)
grids = [SingleBosonGrid.log_grid(k, 6.0, 2.0, 0.5, x) for k, x in [(0.2, 2), (0.1, 3), (0.05, 4), (0.025, 5)]]
for level, P, k_min, xi_max, eP, e0, gap in flatness_probe([0.5, 1.0], model, grids):
    print(f"k_min {k_min:.4f}  xi_max {xi_max:.1f}  P = {P}: E(P) - E(0) = {gap:.4f}")

# %%
# Infrared behaviour of the one-boson cloud as the cutoff goes to zero.
rows, fits = ir_ground_state_probe([-0.75, -0.5, 0.0], 2.0 ** -np.arange(6, 21, 2),
                                   FormFactorModel(profile, profile, g=1e-6))
for mu, f in fits.items():
    print(f"mu = {mu:5.2f}: log-log slope {f['slope']:+.3f}, R^2 against log(1/k_min) {f['log_r2']:.4f}, "
          f"largest step ratio {f['max_ratio']:.4f}")

# %%
# A positive commutator bound that survives truncation.
rep = mourre_check(FormFactorModel(profile, profile, mu=1.0, g=0.1),
                   SingleBosonGrid.log_grid(0.05, 6.0, 1.5, 0.5, 3.0))
print(f"lowest eigenvalue {rep.lambda_min:.5f} against the bound {rep.c0:.5f}: holds = {rep.holds}")
