"""
Decay rate of a free particle state
===================================

A particle of momentum P in the uncoupled model is an eigenstate sitting
inside the continuum of particle-plus-boson states. The coupling makes it
decay at the Golden Rule rate c(P): zero at rest, rising like
|P|^(d + 4 + 4 mu) and decaying slowly at large |P|.
"""

# %%
import numpy as np

from frictionlab import FormFactorModel, RadialProfile
from frictionlab.fgr import c_lorentzian, c_of_P, c_small_P_exponent, fgr_curve, small_P_exponent_oracle
from frictionlab.output import svg_line_plot

profile = RadialProfile("gaussian", 1.0)
P = np.linspace(0.0, 8.0, 65)

# %%
series = []
for mu in (-0.25, 0.0, 0.5, 1.0):
    model = FormFactorModel(profile, profile, mu=mu)
    curve = fgr_curve(P, model)
    i = int(np.argmax(curve.c))
    print(f"mu = {mu:5.2f}  peak c = {curve.c[i]:.4f} at |P| = {P[i]:.3f}  "
          f"small-P exponent {c_small_P_exponent(model):.3f} (scaling {small_P_exponent_oracle(model):g})  "
          f"P c(P) at the end {P[-1] * curve.c[-1]:.3f}")
    series.append((f"mu={mu:g}", P, curve.c))
svg_line_plot("golden_rule_curves.svg", series, "Golden Rule rate", "|P|", "c(P)")

# %%
# The same rate from the imaginary part of a regularized self-energy,
# extrapolated in the regularization.
model = FormFactorModel(profile, profile)
for p in (0.5, 1.0, 2.0):
    value, raw = c_lorentzian(p, model)
    print(f"|P| = {p}: delta {c_of_P(p, model):.8f}  regularized {value:.8f}  raw {np.round(raw, 6)}")

# %%
# In three dimensions only |P| matters.
model3 = FormFactorModel(profile, profile, d=3)
for direction in ([1, 0, 0], [0, 1, 0], [1, 1, 1]):
    u = np.array(direction, float)
    print(direction, c_of_P(u / np.linalg.norm(u), model3))
