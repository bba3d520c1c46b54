"""Constant-velocity drag force, its small-velocity power law, and the v' = -v^k surrogate.

The drag magnitude is the coupling-free quantity

    f_r(v) = (2 pi)^(3/2) v int_0^inf |sigma2_hat(v w)|^2 |K(w)| dw,

so that the force on a particle dragged at constant velocity v is
-g^2 f_r(|v|) v/|v|. The magnitude is used throughout; the kernel K is
nonpositive, and the sign is fixed so the force opposes the motion.
"""

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .errors import InsufficientDataError
from .formfactor import hat_K, sigma2_hat
from .quadrature import QuadratureGrid, integrate

PREFACTOR = (2.0 * math.pi) ** 1.5


class NegligibleDragWarning(RuntimeWarning):
    """The integrand underflows everywhere; the drag is reported as 0."""


@dataclass(frozen=True)
class DragCurve:
    velocities: np.ndarray
    magnitudes: np.ndarray
    mu: float
    fit_exponent: float
    fit_coefficient: float
    fit_window: tuple

    def __post_init__(self):
        v = np.asarray(self.velocities)
        if np.any(v <= 0) or np.any(np.diff(v) <= 0):
            raise ValueError("velocities must be positive and strictly increasing")
        lo, hi = self.fit_window
        if lo < v[0] * (1 - 1e-12) or hi > v[-1] * (1 + 1e-12):
            raise ValueError("fit window must lie inside the sampled velocities")


def drag_magnitude(v, model, grid=QuadratureGrid()):
    """Magnitude of the stationary drag at speed ``v`` (coupling g excluded)."""
    if v <= 0:
        raise ValueError("speed must be positive")
    upper = min(model.rho1_hat.support(grid.cutoff), model.rho2_hat.support(grid.cutoff) / v)
    # integrand ~ w^(2 mu + 1) * w^2 near 0
    beta = 2.0 * model.mu + 3.0
    f = lambda w: sigma2_hat(v * w, model) ** 2 * -hat_K(w, model, grid)
    value = PREFACTOR * v * integrate(f, 0.0, upper, grid, beta)
    if value == 0.0:
        warnings.warn(f"negligible drag at v = {v}: integrand underflows", NegligibleDragWarning)
    return value


def gamma_alpha(model, grid=QuadratureGrid()):
    """Small-velocity coefficient: lim f_r(v) / v^(2 mu + 2).

    Equals (2 pi)^(3/2) C_alpha int w^alpha |K(w)| dw with alpha = 2 mu + 1 and
    C_alpha = rho2_hat(0)^2.
    """
    alpha = 2.0 * model.mu + 1.0
    if alpha <= -1.0:
        raise ValueError("non-integrable exponent: mu must exceed -1")
    c_alpha = float(model.rho2_hat(0.0)) ** 2
    f = lambda w: w**alpha * -hat_K(w, model, grid)
    return PREFACTOR * c_alpha * integrate(f, 0.0, model.rho1_hat.support(grid.cutoff), grid, alpha + 2.0)


def fit_power_law(points, window, min_points=8):
    """Least-squares fit of log f against log v inside ``window``.

    Returns ``(exponent, coefficient)`` with f ~ coefficient * v**exponent.
    """
    pts = np.asarray(points, dtype=float)
    v, f = pts[:, 0], pts[:, 1]
    lo, hi = window
    sel = (v >= lo) & (v <= hi)
    if sel.sum() < min_points:
        raise InsufficientDataError(
            f"insufficient data: {int(sel.sum())} points in window {window}, need {min_points}"
        )
    if np.any(v[sel] <= 0) or np.any(f[sel] <= 0):
        raise ValueError("power-law fit needs positive data")
    slope, intercept = np.polyfit(np.log(v[sel]), np.log(f[sel]), 1)
    return float(slope), float(math.exp(intercept))


def drag_curve(model, velocities, window=(1e-3, 1e-2), grid=QuadratureGrid()):
    """Sample the drag magnitude and fit the small-velocity power law."""
    v = np.asarray(velocities, dtype=float)
    mags = np.array([drag_magnitude(x, model, grid) for x in v])
    expo, coef = fit_power_law(np.column_stack([v, mags]), window)
    return DragCurve(v, mags, model.mu, expo, coef, tuple(window))


@dataclass(frozen=True)
class SurrogateSolution:
    """Closed-form solution of v' = -v^k, v(0) = v0."""

    k_exponent: float
    v0: float

    def __post_init__(self):
        if self.k_exponent < 1.0:
            raise ValueError("k_exponent must be >= 1")
        if self.v0 <= 0:
            raise ValueError("v0 must be positive")

    def velocity(self, t):
        t = np.asarray(t, dtype=float)
        k, v0 = self.k_exponent, self.v0
        if k == 1.0:
            return v0 * np.exp(-t)
        return (v0 ** (1.0 - k) + (k - 1.0) * t) ** (1.0 / (1.0 - k))

    def displacement(self, t):
        """q(t) - q(0)."""
        t = np.asarray(t, dtype=float)
        k, v0 = self.k_exponent, self.v0
        if k == 1.0:
            return v0 * -np.expm1(-t)
        if k == 2.0:
            return np.log1p(v0 * t)
        # v0^(2-k) (1 - (1 + (k-1) v0^(k-1) t)^((2-k)/(1-k))) / (2-k), free of cancellation
        growth = np.log1p((k - 1.0) * v0 ** (k - 1.0) * t)
        return -(v0 ** (2.0 - k)) * np.expm1((2.0 - k) / (1.0 - k) * growth) / (2.0 - k)

    @property
    def q_infinity(self):
        """Total displacement, or the string "unbounded" when k >= 2."""
        k = self.k_exponent
        if k >= 2.0:
            return "unbounded"
        if k == 1.0:
            return self.v0
        return self.v0 ** (2.0 - k) / (2.0 - k)


def surrogate_solve(k_exponent, v0, t):
    """Return ``(v(t), q(t) - q(0))`` for v' = -v^k."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    sol = SurrogateSolution(k_exponent, v0)
    return float(sol.velocity(t)), float(sol.displacement(t))


def exponent_for_mu(mu):
    """Friction exponent k = 2 (mu + 1) of the small-velocity drag."""
    return 2.0 * (mu + 1.0)
