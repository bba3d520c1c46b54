"""Form factors of the particle-membrane coupling and closed-form scalars.

Conventions: Fourier transforms are unitary with symmetric (2 pi)^(-n/2)
factors and forward kernel exp(-i xi.x). Units have c = 1 and a
3-dimensional membrane (field) space. The x-direction form factor
written sigma_1 in the drag and ground-energy formulas is taken to be
rho_1.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import InfraredSingularError
from .quadrature import QuadratureGrid, integrate

#: Particle mass in the quantum fiber Hamiltonian, H_p = -Laplacian.
QUANTUM_MASS = 0.5

PROFILE_KINDS = ("gaussian", "compact-bump", "table")


@dataclass(frozen=True)
class RadialProfile:
    """A real radial function of a nonnegative radius.

    ``gaussian``: ``A exp(-s^2 / (2 sigma^2))``.
    ``compact-bump``: ``A exp(1 - 1 / (1 - (s/sigma)^2))`` for s < sigma, 0 beyond.
    ``table``: piecewise-linear interpolation of ``(radii, values)``, 0 past the last radius.
    """

    kind: str = "gaussian"
    scale: float = 1.0
    amplitude: float = 1.0
    radii: tuple = field(default=(), repr=False)
    values: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "table":
            if len(self.radii) < 2 or len(self.radii) != len(self.values):
                raise ValueError("table profile needs matching radii/values of length >= 2")
            if np.any(np.diff(self.radii) <= 0) or self.radii[0] != 0.0:
                raise ValueError("table radii must start at 0 and increase strictly")
        elif self.scale <= 0:
            raise ValueError("profile scale must be positive")

    def __call__(self, s):
        s = np.abs(np.asarray(s, dtype=float))
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-(s**2) / (2.0 * self.scale**2))
        if self.kind == "compact-bump":
            u = s / self.scale
            out = np.zeros_like(u)
            inside = u < 1.0
            out[inside] = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
            return out if out.ndim else float(out)
        return np.interp(s, self.radii, self.values, right=0.0)

    def derivative(self, s):
        """Radial derivative d/ds of the profile."""
        s = np.abs(np.asarray(s, dtype=float))
        if self.kind == "gaussian":
            return -s / self.scale**2 * self(s)
        if self.kind == "compact-bump":
            u = s / self.scale
            out = np.zeros_like(u)
            inside = u < 1.0
            ui = u[inside]
            val = self.amplitude * np.exp(1.0 - 1.0 / (1.0 - ui**2))
            out[inside] = val * (-2.0 * ui / (1.0 - ui**2) ** 2) / self.scale
            return out if out.ndim else float(out)
        r = np.asarray(self.radii)
        slopes = np.gradient(np.asarray(self.values), r)
        return np.interp(s, r, slopes, right=0.0)

    def support(self, cutoff=12.0):
        """Radius beyond which the profile is treated as zero."""
        if self.kind == "gaussian":
            return cutoff * self.scale
        if self.kind == "compact-bump":
            return self.scale
        return float(self.radii[-1])


@dataclass(frozen=True)
class FormFactorModel:
    """Single source of truth for the coupling of the particle to the membranes.

    ``rho1_hat`` is a profile of |xi| (xi in R^d), ``rho2_hat`` a profile of
    |k| (k in R^3). ``mu`` is the infrared exponent, ``g`` the coupling and
    ``m`` the classical particle mass.
    """

    rho1_hat: RadialProfile = RadialProfile()
    rho2_hat: RadialProfile = RadialProfile()
    mu: float = 0.0
    d: int = 1
    m: float = 1.0
    g: float = 1.0
    membrane_dim: int = 3
    c: float = 1.0

    def __post_init__(self):
        if not self.mu > -1.0:
            raise ValueError(f"non-integrable exponent: mu must exceed -1 (got {self.mu})")
        if self.d < 1 or int(self.d) != self.d:
            raise ValueError("d must be a positive integer")
        if self.membrane_dim != 3 or self.c != 1.0:
            raise ValueError("only 3-dimensional membranes with c = 1 are supported")
        if self.m <= 0:
            raise ValueError("mass must be positive")

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


def sphere_area(n):
    """Surface area of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _split_xi(q, xi, d):
    """Return (q . xi, |xi|) for d = 1 scalars or vectors along the last axis."""
    xi = np.asarray(xi, dtype=float)
    q = np.asarray(q, dtype=float)
    if d == 1:
        qs = q.reshape(()) if q.size == 1 else q
        if xi.ndim and xi.shape[-1] == 1:
            xi = xi[..., 0]
        return qs * xi, np.abs(xi)
    return xi @ q, np.linalg.norm(xi, axis=-1)


def sigma2_hat(k, model):
    """Membrane form factor |k|^(mu + 1/2) rho2_hat(|k|)."""
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("radius must be nonnegative")
    e = model.mu + 0.5
    if e < 0 and np.any(k == 0):
        raise InfraredSingularError(
            f"infrared-singular evaluation: sigma2_hat(0) diverges for mu = {model.mu}"
        )
    out = k**e * model.rho2_hat(k)
    return out if out.ndim else float(out)


def coupling_h(q, k, xi, model):
    """Quantum coupling function exp(-i q.xi) |k|^mu rho1_hat(|xi|) rho2_hat(|k|)."""
    k = np.asarray(k, dtype=float)
    if model.mu < 0 and np.any(k == 0):
        raise InfraredSingularError(
            f"infrared-singular evaluation: |k|^mu at k = 0 for mu = {model.mu}"
        )
    qxi, axi = _split_xi(q, xi, model.d)
    return np.exp(-1j * qxi) * k**model.mu * model.rho1_hat(axi) * model.rho2_hat(k)


def static_field_psi_q(q, k, xi, model):
    """Field configuration minimizing the classical energy with the particle at rest at q.

    Returns -g exp(-i xi.q) rho1_hat(|xi|) sigma2_hat(k) / k^2 (omega(k) = |k|).
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise InfraredSingularError("infrared-singular evaluation: static field at k = 0")
    qxi, axi = _split_xi(q, xi, model.d)
    return -model.g * np.exp(-1j * qxi) * model.rho1_hat(axi) * sigma2_hat(k, model) / k**2


def rho1_norm_sq(model, grid=QuadratureGrid()):
    """||rho_1||^2 in L^2(R^d), computed from rho1_hat (Plancherel)."""
    prof = model.rho1_hat
    area = sphere_area(model.d)
    f = lambda r: r ** (model.d - 1) * prof(r) ** 2
    return area * float(integrate(f, 0.0, prof.support(grid.cutoff), grid, model.d - 1))


def eta_integral(omega, model, grid=QuadratureGrid()):
    """Integral over the d-1 transverse directions of rho1_hat(sqrt(omega^2 + eta^2))^2."""
    omega = np.asarray(omega, dtype=float)
    prof = model.rho1_hat
    if model.d == 1:
        return prof(omega) ** 2
    area = sphere_area(model.d - 1)
    flat = np.atleast_1d(omega).ravel()

    def f(r):
        rad = np.sqrt(flat[:, None] ** 2 + r[None, :] ** 2)
        return r[None, :] ** (model.d - 2) * prof(rad) ** 2

    out = area * integrate(f, 0.0, prof.support(grid.cutoff), grid, model.d - 2)
    return out.reshape(omega.shape) if omega.ndim else float(out[0])


def hat_K(omega, model, grid=QuadratureGrid()):
    """Drag kernel sqrt(2 pi) int d eta [FT(d_1 rho_1)(omega, eta)]^2.

    The transform of the x_1-derivative is i omega rho1_hat, so the square is
    -omega^2 rho1_hat^2 and the kernel is nonpositive with K(0) = 0.
    """
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("frequency must be nonnegative")
    out = -math.sqrt(2.0 * math.pi) * omega**2 * eta_integral(omega, model, grid)
    return out if np.ndim(out) else float(out)


def classical_ground_energy_E0(model, grid=QuadratureGrid()):
    """Minimum of the classical energy, -g^2 ||rho_1||^2 / 2 int d^3k sigma2_hat^2 / |k|^2.

    In radial form the k-integral is 4 pi int k^(2 mu + 1) rho2_hat(k)^2 dk.
    """
    if model.g == 0:
        return 0.0
    prof = model.rho2_hat
    beta = 2.0 * model.mu + 1.0
    f = lambda k: k**beta * prof(k) ** 2
    kint = integrate(f, grid.k_min, prof.support(grid.cutoff), grid, beta)
    return -model.g**2 * 0.5 * rho1_norm_sq(model, grid) * 4.0 * math.pi * float(kint)
