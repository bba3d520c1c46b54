"""
A kicked particle slowing down in the membranes
===============================================

The particle starts at speed v0 with the field relaxed around it. Energy
leaks into the membranes and the particle decelerates. Whether it travels
a finite or an infinite distance depends on mu: the small-speed drag goes
like v^k with k = 2(mu + 1), and the toy law v' = -C v^k stops the particle
within a finite distance exactly when k < 2.
"""

# %%
import numpy as np

from frictionlab import FormFactorModel, RadialProfile
from frictionlab.classical import ModeGrid, SimulationConfig, doubling_increments, run
from frictionlab.drag import SurrogateSolution, exponent_for_mu, gamma_alpha
from frictionlab.output import svg_line_plot

profile = RadialProfile("gaussian", 1.0)
g, v0, T, dt = 0.1, 0.5, 1000.0, 0.2

# Geometric k cells resolve the slow modes the particle excites late on;
# a fine xi grid keeps the periodic box longer than the wake.
edges = np.geomspace(1e-6, 4.0, 1528)
grid = ModeGrid.from_edges(edges, 4.6, 46)
print("mode grid", grid.shape)

# %%
series = []
for mu in (-0.25, 0.25):
    model = FormFactorModel(profile, profile, mu=mu, g=g)
    rec = run(SimulationConfig(model, grid, dt, T, v0, sample_every=5))
    C = g * g * gamma_alpha(model) / model.m
    toy = SurrogateSolution(exponent_for_mu(mu), v0)
    t_end, inc = doubling_increments(rec, 5)
    print(f"\nmu = {mu:+.2f}, k = {exponent_for_mu(mu):.2f}")
    print("  relative energy drift", np.ptp(rec.energy) / abs(rec.energy[0]))
    print("  distance gained over [T/2^(j+1), T/2^j]:", np.round(inc, 4))
    print("  ratios of successive gains:", np.round(inc[1:] / inc[:-1], 3))
    print(f"  q(T) = {rec.q[-1]:.3f}, toy law {float(toy.displacement(C * T)) / C:.3f}, "
          f"toy limit {toy.q_infinity if isinstance(toy.q_infinity, str) else toy.q_infinity / C}")
    series.append((f"mu={mu:+g}", rec.t, rec.q))

# %%
# Shrinking gains add up to a finite range; growing gains do not.
svg_line_plot("friction_demo.svg", series, "displacement", "t", "q(t)")
print("wrote friction_demo.svg")
