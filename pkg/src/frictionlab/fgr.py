"""Fermi Golden Rule rate c(P) of the embedded eigenvalue P^2 of H_0(P).

With h0 = |k|^mu rho1_hat(|xi|) rho2_hat(|k|) and D = (P - xi)^2 + |k| - P^2,

    c(P) = pi int d^3k d^d xi |h0|^2 delta(D)
         = 4 pi^2 int d^d xi w^(2 + 2 mu) rho1_hat(|xi|)^2 rho2_hat(w)^2,  w = 2 P.xi - xi^2 >= 0,

the delta removing the radial k integral (4 pi k^2 from the polar
measure, pi from the delta). The domain w >= 0 is the ball of radius |P|
centred at P. The same number is the eps -> 0 limit of
Im int |h0|^2 / (D - i eps).
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import EpsilonUnderResolved
from .quadrature import QuadratureGrid, graded_rule, grading_power, integrate

FGR_GRID = QuadratureGrid(n_nodes=256, tol=1e-9)


def _norm_P(P):
    return float(np.linalg.norm(np.atleast_1d(np.asarray(P, dtype=float))))


def _integrate_both_ends(f, a, b, grid, beta_a, beta_b):
    """Integral over [a, b] with power-law behaviour at both ends."""
    m = 0.5 * (a + b)
    left = integrate(lambda s: f(a + s), 0.0, m - a, grid, beta_a)
    right = integrate(lambda s: f(b - s), 0.0, b - m, grid, beta_b)
    return left + right


def _omega_integral(Omega, model, grid):
    """G(Omega) = int_0^Omega w^(2 + 2 mu) rho2_hat(w)^2 dw for an array of Omega >= 0."""
    Omega = np.asarray(Omega, dtype=float)
    e = 2.0 + 2.0 * model.mu
    prof = model.rho2_hat
    f = lambda t: t[None, :] ** e * prof(Omega[:, None] * t[None, :]) ** 2
    return Omega ** (e + 1.0) * integrate(f, 0.0, 1.0, grid, e)


def c_of_P(P, model, grid=FGR_GRID):
    """Fermi Golden Rule rate; depends on P only through |P|."""
    p = _norm_P(P)
    if p == 0.0:
        return 0.0
    mu, d = model.mu, model.d
    e = 2.0 + 2.0 * mu
    r1, r2 = model.rho1_hat, model.rho2_hat
    cut = r1.support(grid.cutoff)
    b = min(2.0 * p, cut)
    if d == 1:
        def f(x):
            w = np.clip(2.0 * p * x - x * x, 0.0, None)
            return w**e * r1(x) ** 2 * r2(w) ** 2

        val = _integrate_both_ends(f, 0.0, 2.0 * p, grid, e, e) if b == 2.0 * p else integrate(f, 0.0, b, grid, e)
        return 4.0 * math.pi**2 * float(val)
    if d == 3:
        # polar axis along P: int dc over c >= r / 2p gives G(2pr - r^2) / (2pr)
        def f(r):
            return r * r1(r) ** 2 * _omega_integral(np.clip(2.0 * p * r - r * r, 0.0, None), model, grid)

        val = _integrate_both_ends(f, 0.0, 2.0 * p, grid, e + 2.0, e + 1.0) if b == 2.0 * p else integrate(f, 0.0, b, grid, e + 2.0)
        return 4.0 * math.pi**3 / p * float(val)
    if d == 2:
        def inner(r):
            th0 = np.arccos(np.clip(r / (2.0 * p), -1.0, 1.0))

            def g(s):  # s = th0 - theta
                th = th0[:, None] - s[None, :] * th0[:, None]
                w = np.clip(2.0 * p * r[:, None] * np.cos(th) - r[:, None] ** 2, 0.0, None)
                return w**e * r2(w) ** 2

            return 2.0 * th0 * integrate(g, 0.0, 1.0, grid, e)

        f = lambda r: r * r1(r) ** 2 * inner(r)
        val = _integrate_both_ends(f, 0.0, 2.0 * p, grid, e + 1.0, e + 0.5) if b == 2.0 * p else integrate(f, 0.0, b, grid, e + 1.0)
        return 4.0 * math.pi**2 * float(val)
    raise ValueError("c_of_P supports d in {1, 2, 3}")


def c_monte_carlo(P, model, n_samples=10**7, seed=0, chunk=10**6):
    """Monte Carlo estimate of c(P) over the ball |xi - P| < |P|; returns (mean, stderr)."""
    P = np.atleast_1d(np.asarray(P, dtype=float))
    d = P.size
    if d != model.d:
        raise ValueError("P must have the model dimension")
    p = float(np.linalg.norm(P))
    if p == 0.0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    vol = math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0) * p**d
    e = 2.0 + 2.0 * model.mu
    s1 = s2 = 0.0
    done = 0
    while done < n_samples:
        n = min(chunk, n_samples - done)
        u = rng.standard_normal((n, d))
        u /= np.linalg.norm(u, axis=1)[:, None]
        rad = p * rng.random(n) ** (1.0 / d)
        xi = P + rad[:, None] * u
        w = np.clip(2.0 * xi @ P - np.sum(xi * xi, axis=1), 0.0, None)
        vals = w**e * model.rho1_hat(np.linalg.norm(xi, axis=1)) ** 2 * model.rho2_hat(w) ** 2
        s1 += vals.sum()
        s2 += (vals * vals).sum()
        done += n
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean**2, 0.0)
    scale = 4.0 * math.pi**2 * vol
    return scale * mean, scale * math.sqrt(var / n_samples)


def small_P_exponent_oracle(model):
    """Exponent of c(P) as P -> 0 from the scaling xi = |P| eta: d + 4 + 4 mu."""
    return model.d + 4.0 + 4.0 * model.mu


def c_small_P_exponent(model, grid=FGR_GRID, ladder=None):
    """Log-log slope of c over |P| in {2^-6, ..., 2^-3}."""
    ladder = 2.0 ** np.arange(-6, -2) if ladder is None else np.asarray(ladder, dtype=float)
    c = np.array([c_of_P(p, model, grid) for p in ladder])
    if np.any(c <= 0) or ladder.size < 2:
        raise ValueError("fit degeneracy: need at least two positive samples")
    return float(np.polyfit(np.log(ladder), np.log(c), 1)[0])


# Lorentzian regularization -------------------------------------------------

def _kernel_pieces(k0, K, n, power, beta0):
    """Nodes/weights on [0, K] clustered at 0 and at each k0 in (0, K); shapes (m, q)."""
    t, w = graded_rule(0.0, 1.0, n, power)
    t0, w0 = graded_rule(0.0, 1.0, n, grading_power(beta0))
    k0 = np.asarray(k0, dtype=float)
    inside = (k0 > 0) & (k0 < K)
    a = np.where(inside, k0, 0.5 * K)
    # [0, a/2] graded at 0, [a/2, a] graded at a, [a, a + h] graded at a, [a + h, K] plain
    h = np.minimum(a, 0.5 * (K - a))
    blocks = [
        (0.5 * a[:, None] * t0[None, :], 0.5 * a[:, None] * w0[None, :]),
        (a[:, None] - 0.5 * a[:, None] * t[None, :], 0.5 * a[:, None] * w[None, :]),
        (a[:, None] + h[:, None] * t[None, :], h[:, None] * w[None, :]),
    ]
    tl, wl = graded_rule(0.0, 1.0, n, 1.0)
    lo = a + h
    blocks.append((lo[:, None] + (K - lo)[:, None] * tl[None, :], (K - lo)[:, None] * wl[None, :]))
    x = np.concatenate([b[0] for b in blocks], axis=1)
    wx = np.concatenate([b[1] for b in blocks], axis=1)
    # distance from k0 to the second-nearest node on either side
    spacing = np.where(inside, np.maximum(0.5 * a, h) * t[1], 0.0)
    return x, wx, inside, spacing


def _k_transform(k0, eps, model, grid, n=96, power=4.0):
    """int_0^inf 4 pi k^(2 + 2 mu) rho2_hat(k)^2 / (k - k0 - i eps) dk for an array of k0."""
    e = 2.0 + 2.0 * model.mu
    prof = model.rho2_hat
    K = prof.support(grid.cutoff)
    f = lambda k: 4.0 * math.pi * k**e * prof(k) ** 2
    k0 = np.asarray(k0, dtype=float)
    x, wx, inside, spacing = _kernel_pieces(k0, K, n, power, e)
    if np.any(spacing[inside] > eps / 3.0):
        raise EpsilonUnderResolved(
            f"epsilon under-resolved: eps = {eps:g} but node spacing at the resonance reaches {spacing[inside].max():.2e}"
        )
    f0 = np.where(inside, f(np.clip(k0, 0.0, K)), 0.0)
    num = f(x) - f0[:, None]
    out = np.sum(wx * num / (x - k0[:, None] - 1j * eps), axis=1)
    log_part = np.log(K - k0 - 1j * eps) - np.log(-k0 - 1j * eps)
    return out + f0 * log_part


def lorentzian_selfenergy(P, lam, eps, model, grid=FGR_GRID, n=96, chunk=2048):
    """int d^3k d^d xi |h0|^2 / ((P - xi)^2 + |k| - lam - i eps), coupling-free.

    The k integral is done per xi node with the resonant value subtracted
    and its logarithm added in closed form; the xi integral uses graded
    Gauss-Legendre pieces split where the resonance enters k = 0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    p = _norm_P(P)
    d = model.d
    r1 = model.rho1_hat
    X = r1.support(grid.cutoff)
    beta = 2.0 + 2.0 * model.mu

    def kpart(k0):
        k0 = np.ravel(k0)
        return np.concatenate([_k_transform(k0[i:i + chunk], eps, model, grid, n) for i in range(0, k0.size, chunk)])

    def pieces(a, b, breaks):
        pts = np.unique(np.concatenate([[a, b], [x for x in breaks if a < x < b]]))
        xs, ws = [], []
        tt, wt = graded_rule(0.0, 1.0, n, grading_power(beta))
        for lo, hi in zip(pts[:-1], pts[1:]):
            m = 0.5 * (lo + hi)
            xs += [lo + (m - lo) * tt, hi - (hi - m) * tt]
            ws += [(m - lo) * wt, (hi - m) * wt]
        return np.concatenate(xs), np.concatenate(ws)

    if d == 1:
        br = [p - math.sqrt(lam), p + math.sqrt(lam)] if lam > 0 else [p]
        xi, w = pieces(-X, X, br)
        vals = kpart(lam - (p - xi) ** 2)
        return complex(np.sum(w * r1(xi) ** 2 * vals))
    if d == 3:
        # polar axis along P; c = cos(angle); k0 = lam - p^2 - r^2 + 2 p r c
        rb = [abs(p - math.sqrt(max(lam, 0.0))), p + math.sqrt(max(lam, 0.0))] if p > 0 else []
        r, wr = pieces(0.0, X, rb)
        tt, wt = graded_rule(0.0, 1.0, n, grading_power(beta))
        total = 0.0 + 0.0j
        for ri, wri in zip(r, wr):
            cs = (ri * ri + p * p - lam) / (2.0 * p * ri) if p > 0 and ri > 0 else 2.0
            if -1.0 < cs < 1.0:
                m1, m2 = 0.5 * (cs - 1.0), 0.5 * (cs + 1.0)
                c = np.concatenate([-1.0 + (m1 + 1.0) * tt, cs - (cs - m1) * tt, cs + (m2 - cs) * tt, 1.0 - (1.0 - m2) * tt])
                wc = np.concatenate([(m1 + 1.0) * wt, (cs - m1) * wt, (m2 - cs) * wt, (1.0 - m2) * wt])
            else:
                c, wc = graded_rule(-1.0, 1.0, 2 * n, 1.0)
            k0 = lam - p * p - ri * ri + 2.0 * p * ri * c
            total += 2.0 * math.pi * wri * ri * ri * r1(ri) ** 2 * np.sum(wc * kpart(k0))
        return complex(total)
    raise ValueError("lorentzian_selfenergy supports d in {1, 3}")


def extrapolate_eps(eps_list, values):
    """Polynomial extrapolation to eps = 0 through the given samples (Richardson)."""
    e = np.asarray(eps_list, dtype=float)
    v = np.asarray(values)
    coef = np.polyfit(e, v, len(e) - 1)
    return coef[-1]


def c_lorentzian(P, model, eps_list=(1e-1, 1e-2, 1e-3), grid=FGR_GRID):
    """Im of the regularized self-energy at lam = P^2, extrapolated to eps = 0."""
    p = _norm_P(P)
    vals = [lorentzian_selfenergy(p, p * p, eps, model, grid).imag for eps in eps_list]
    return float(extrapolate_eps(eps_list, vals)), vals


@dataclass(frozen=True)
class FgrCurve:
    P: np.ndarray
    c: np.ndarray
    mu: float
    d: int
    fingerprint: str
    method: str

    def __post_init__(self):
        if np.any(self.c < 0):
            raise ValueError("c values must be nonnegative")
        zero = np.asarray(self.P) == 0
        if np.any(np.asarray(self.c)[zero] != 0):
            raise ValueError("c must vanish at P = 0")


def fgr_curve(P_values, model, method="delta", grid=FGR_GRID, eps_list=(1e-1, 1e-2, 1e-3)):
    P = np.asarray(P_values, dtype=float)
    if method == "delta":
        c = np.array([c_of_P(p, model, grid) for p in P])
        tag = "delta-resolved"
    elif method == "lorentzian":
        c = np.array([0.0 if p == 0 else max(c_lorentzian(p, model, eps_list, grid)[0], 0.0) for p in P])
        tag = "lorentzian " + ",".join(f"{e:g}" for e in eps_list)
    else:
        raise ValueError("method must be 'delta' or 'lorentzian'")
    fp = f"{model.rho1_hat.kind}:{model.rho1_hat.scale:g}/{model.rho2_hat.kind}:{model.rho2_hat.scale:g}"
    return FgrCurve(P, c, model.mu, model.d, fp, tag)


def is_unimodal(values):
    """True when the sequence rises to a single interior maximum and then falls."""
    v = np.asarray(values, dtype=float)
    i = int(np.argmax(v))
    if i == 0 or i == v.size - 1:
        return False
    return bool(np.all(np.diff(v[: i + 1]) > 0) and np.all(np.diff(v[i:]) < 0))
