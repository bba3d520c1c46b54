"""
Drag on a particle pulled at constant speed
===========================================

A particle dragged through the membranes at speed v feels a force opposing
the motion. For small v its magnitude follows a power law whose exponent is
set by the infrared exponent mu of the membrane form factor.
"""

# %%
import numpy as np

from frictionlab import FormFactorModel, RadialProfile
from frictionlab.drag import drag_curve, exponent_for_mu, gamma_alpha
from frictionlab.output import svg_line_plot

# Gaussian profiles of unit width for both form factors
profile = RadialProfile("gaussian", 1.0)
v = np.geomspace(1e-3, 1.0, 61)

# %%
# Fit log f against log v on [1e-3, 1e-2] for a few exponents.
series = []
for mu in (-0.5, -0.25, 0.0, 0.5):
    model = FormFactorModel(profile, profile, mu=mu)
    curve = drag_curve(model, v)
    print(f"mu = {mu:5.2f}   fitted exponent {curve.fit_exponent:.4f}   "
          f"expected {exponent_for_mu(mu):.2f}   gamma {gamma_alpha(model):.4f}   "
          f"fitted coefficient {curve.fit_coefficient:.4f}")
    series.append((f"mu={mu:g}", v, curve.magnitudes))

# %%
# Past v ~ 1 the drag bends over: the form factor cuts the resonant modes off.
svg_line_plot("drag_power_law.svg", series, "drag magnitude", "v", "f_r(v)", logx=True, logy=True)
print("wrote drag_power_law.svg")
