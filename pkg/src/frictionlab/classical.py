"""Particle plus membrane field in normal variables, integrated by Strang splitting.

The field is represented on a tensor grid of radial momenta k (3-D radial
reduction, weight 4 pi k^2 dk) and particle-space frequencies xi (d = 1,
symmetric grid). Each node carries a complex normal variable alpha, and

    psi_hat = (alpha(xi) + conj alpha(-xi)) / sqrt(2k),
    pi_hat  = -i sqrt(k/2) (alpha(xi) - conj alpha(-xi)),

so psi_hat(-xi) = conj psi_hat(xi) holds for any alpha and the physical
field is real by construction. With lam = g rho1_hat(|xi|) sigma2_hat(k) / sqrt(2k)
and node weights W the Hamiltonian is

    H = p^2 / 2m + sum W k |alpha|^2 + 2 sum W lam Re(exp(i xi q) alpha),

giving alpha' = -i (k alpha + lam exp(-i xi q)) and p' = 2 sum W lam xi Im(exp(i xi q) alpha).
The total momentum p + sum W xi |alpha|^2 is conserved exactly by each substep.
"""

from dataclasses import dataclass
import hashlib
import math

import numpy as np

from .errors import BlowUpError, TransientNotSettled
from .formfactor import sigma2_hat


@dataclass(frozen=True)
class ModeGrid:
    """Tensor grid of radial k-cells and symmetric xi-cells (d = 1).

    Use the ``uniform``, ``graded`` or ``from_edges`` constructors.
    """

    k_nodes: np.ndarray
    k_weights: np.ndarray
    xi_nodes: np.ndarray
    xi_weights: np.ndarray
    k_min: float
    k_max: float
    xi_max: float

    def __post_init__(self):
        if self.k_min <= 0:
            raise ValueError("k_min must be positive")
        if np.any(self.k_weights <= 0) or np.any(self.xi_weights <= 0):
            raise ValueError("weights must be positive")
        if not np.allclose(self.xi_nodes, -self.xi_nodes[::-1], rtol=0, atol=1e-14 * self.xi_max):
            raise ValueError("xi grid must be symmetric")

    @classmethod
    def from_edges(cls, k_edges, xi_max, n_xi):
        """Midpoint cells between ``k_edges`` times ``n_xi`` midpoint cells on [-xi_max, xi_max]."""
        e = np.asarray(k_edges, dtype=float)
        if e[0] <= 0 or np.any(np.diff(e) <= 0):
            raise ValueError("k edges must be positive and increasing")
        k = 0.5 * (e[1:] + e[:-1])
        wk = 4.0 * math.pi * k**2 * np.diff(e)
        if n_xi < 2 or n_xi % 2:
            raise ValueError("n_xi must be even and >= 2 (no node at xi = 0)")
        h = 2.0 * xi_max / n_xi
        xi = -xi_max + h * (np.arange(n_xi) + 0.5)
        xi = 0.5 * (xi - xi[::-1])  # exact mirror symmetry
        return cls(k, wk, xi, np.full(n_xi, h), float(e[0]), float(e[-1]), float(xi_max))

    @classmethod
    def uniform(cls, k_max=6.0, n_k=240, xi_max=6.0, n_xi=120, k_min=None):
        """Uniform k-cells on [k_min, k_max]; k_min defaults to a tiny positive edge."""
        lo = k_max * 1e-9 if k_min is None else k_min
        return cls.from_edges(np.linspace(lo, k_max, n_k + 1), xi_max, n_xi)

    @classmethod
    def graded(cls, k_min=1e-4, k_switch=0.2, ratio=1.05, h=0.01, k_max=6.0, xi_max=6.0, n_xi=60):
        """Geometric cells from k_min to k_switch, then uniform cells of width about h."""
        n_geo = max(1, math.ceil(math.log(k_switch / k_min) / math.log(ratio)))
        geo = np.geomspace(k_min, k_switch, n_geo + 1)
        n_uni = max(1, math.ceil((k_max - k_switch) / h))
        uni = np.linspace(k_switch, k_max, n_uni + 1)[1:]
        return cls.from_edges(np.concatenate([geo, uni]), xi_max, n_xi)

    @property
    def shape(self):
        return (self.k_nodes.size, self.xi_nodes.size)

    @property
    def weights(self):
        return self.k_weights[:, None] * self.xi_weights[None, :]

    def fingerprint(self):
        h = hashlib.sha256()
        for a in (self.k_nodes, self.k_weights, self.xi_nodes, self.xi_weights):
            h.update(np.ascontiguousarray(a).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class ClassicalState:
    q: float
    p: float
    alpha: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class TrajectoryRecord:
    t: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energy: np.ndarray
    momentum: np.ndarray
    field_energy: np.ndarray
    fingerprint: str = ""

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must increase strictly")

    def columns(self):
        return {
            "t": self.t, "q": self.q, "p": self.p, "E": self.energy,
            "P_tot": self.momentum, "E_field": self.field_energy,
        }


def _require_1d(model):
    if model.d != 1:
        raise ValueError("dynamics are implemented for d = 1 only")


def coupling_lambda(model, grid):
    """Node couplings lam = g rho1_hat(|xi|) sigma2_hat(k) / sqrt(2k), shape (n_k, n_xi)."""
    _require_1d(model)
    k = grid.k_nodes
    return model.g * np.outer(sigma2_hat(k, model) / np.sqrt(2.0 * k), model.rho1_hat(grid.xi_nodes))


class _Workspace:
    """Arrays that stay fixed along a trajectory."""

    def __init__(self, model, grid):
        _require_1d(model)
        self.model, self.grid = model, grid
        self.W = grid.weights
        self.lam = coupling_lambda(model, grid)
        self.Wlam = self.W * self.lam
        self.Wlam_xi = self.Wlam * grid.xi_nodes[None, :]
        self.Wlam2_xi = float(np.sum(self.Wlam_xi * self.lam))
        self.k = grid.k_nodes[:, None]
        self.xi = grid.xi_nodes
        self._dt = None

    def rotation(self, dt):
        if self._dt != dt:
            self._rot = np.exp(-1j * self.k * dt)
            self._dt = dt
        return self._rot


def _kick(ws, q, p, alpha, tau):
    """Exact flow of the interaction term for time tau (q frozen)."""
    phase = np.exp(1j * ws.xi * q)
    im = np.einsum("ij,ij->", ws.Wlam_xi, (phase[None, :] * alpha).imag)
    p = p + 2.0 * tau * im - tau**2 * ws.Wlam2_xi
    alpha = alpha - (1j * tau) * ws.lam * np.conj(phase)[None, :]
    return p, alpha


def _check_finite(state):
    bad = ~np.isfinite(state.alpha)
    if bad.any():
        node = tuple(int(i) for i in np.argwhere(bad)[0])
        raise BlowUpError(f"blow-up detected at node {node}", node=node)
    if not (math.isfinite(state.p) and math.isfinite(state.q)):
        raise BlowUpError("blow-up detected in particle variables", node=None)


def step_strang(state, dt, model, grid, _ws=None):
    """One step: half interaction kick, exact free flow, half interaction kick."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    ws = _ws or _Workspace(model, grid)
    p, alpha = _kick(ws, state.q, state.p, state.alpha, 0.5 * dt)
    alpha = alpha * ws.rotation(dt)
    q = state.q + p * dt / model.m
    p, alpha = _kick(ws, q, p, alpha, 0.5 * dt)
    new = ClassicalState(q, float(p), alpha, state.t + dt)
    _check_finite(new)
    return new


def field_energy(state, model, grid):
    return float(np.sum(grid.weights * grid.k_nodes[:, None] * np.abs(state.alpha) ** 2))


def interaction_energy(state, model, grid):
    lam = coupling_lambda(model, grid)
    phase = np.exp(1j * grid.xi_nodes * state.q)
    return float(2.0 * np.sum(grid.weights * lam * (phase[None, :] * state.alpha).real))


def total_energy(state, model, grid):
    """Discrete Hamiltonian: kinetic + field + interaction energy."""
    kin = 0.5 * state.p**2 / model.m
    return kin + field_energy(state, model, grid) + interaction_energy(state, model, grid)


def total_momentum(state, model, grid):
    """p plus the field momentum sum W xi |alpha|^2."""
    return state.p + float(np.sum(grid.weights * grid.xi_nodes[None, :] * np.abs(state.alpha) ** 2))


def force(state, model, grid):
    """Force on the particle, -dH/dq."""
    lam = coupling_lambda(model, grid)
    phase = np.exp(1j * grid.xi_nodes * state.q)
    return float(2.0 * np.sum(grid.weights * lam * grid.xi_nodes[None, :] * (phase[None, :] * state.alpha).imag))


def static_alpha(q, model, grid, dt=None):
    """Field minimizing the energy with the particle at rest at q.

    With ``dt`` the fixed point of the Strang map at that step is returned
    instead; it differs from the continuous-time one by O((k dt)^2).
    """
    lam = coupling_lambda(model, grid)
    k = grid.k_nodes[:, None]
    phase = np.exp(-1j * grid.xi_nodes * q)[None, :]
    if dt is None:
        return -lam * phase / k
    x = 0.5 * k * dt
    return -lam * phase / k * (x / np.tan(x))


def static_state(q, model, grid, p=0.0, dt=None):
    return ClassicalState(float(q), float(p), static_alpha(q, model, grid, dt))


def vacuum_state(model, grid, q=0.0, p=0.0):
    return ClassicalState(float(q), float(p), np.zeros(grid.shape, dtype=complex))


def psi_hat(state, grid):
    """Field psi_hat(k, xi) reconstructed from the normal variables."""
    a = state.alpha
    return (a + np.conj(a[:, ::-1])) / np.sqrt(2.0 * grid.k_nodes)[:, None]


def pi_hat(state, grid):
    a = state.alpha
    return -1j * np.sqrt(0.5 * grid.k_nodes)[:, None] * (a - np.conj(a[:, ::-1]))


def field_in_x(state, grid, x):
    """psi(k, x) = (2 pi)^(-1/2) sum_xi dxi psi_hat exp(i xi x); shape (n_k, len(x))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    kern = np.exp(1j * np.outer(grid.xi_nodes, x)) * grid.xi_weights[:, None]
    return psi_hat(state, grid) @ kern / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class SimulationConfig:
    model: object
    grid: ModeGrid
    dt: float = 0.02
    T: float = 100.0
    v0: float = 0.5
    q0: float = 0.0
    initial: str = "static"
    sample_every: int = 50

    def __post_init__(self):
        if self.dt <= 0 or self.T <= 0:
            raise ValueError("dt and T must be positive")
        if self.initial not in ("static", "vacuum"):
            raise ValueError("initial must be 'static' or 'vacuum'")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")


def run(config):
    """Integrate a trajectory and sample q, p, E, P_tot and the field energy."""
    model, grid = config.model, config.grid
    p0 = model.m * config.v0
    if config.initial == "static":
        state = static_state(config.q0, model, grid, p0)
    else:
        state = vacuum_state(model, grid, config.q0, p0)
    ws = _Workspace(model, grid)
    n_steps = int(round(config.T / config.dt))
    rows = []

    def sample(s):
        rows.append((s.t, s.q, s.p, total_energy(s, model, grid),
                     total_momentum(s, model, grid), field_energy(s, model, grid)))

    sample(state)
    for n in range(1, n_steps + 1):
        state = step_strang(state, config.dt, model, grid, ws)
        if n % config.sample_every == 0 or n == n_steps:
            sample(state)
    cols = np.array(rows).T
    fp = hashlib.sha256(repr((model, config.dt, config.T, config.v0, config.q0,
                              config.initial, grid.fingerprint())).encode()).hexdigest()[:16]
    return TrajectoryRecord(*cols, fingerprint=fp)


def measure_drag_clamped(v, model, grid, T=100.0, dt=0.02, tol=0.01, return_series=False):
    """Long-time average of the force along v for a particle moved at q = v t.

    The field starts from the static configuration at q = 0; the first half
    of the run is discarded. The averages over [T/2, 3T/4] and [3T/4, T] must
    agree to ``tol`` relative, otherwise ``TransientNotSettled`` is raised.
    The returned force has the sign opposite to v; for v > 0 it is compared
    with -g^2 drag_magnitude(v).
    """
    if v == 0:
        raise ValueError("velocity must be nonzero")
    ws = _Workspace(model, grid)
    n_steps = int(round(T / dt))
    alpha = static_alpha(0.0, model, grid)
    rot = ws.rotation(dt)
    forces = np.empty(n_steps + 1)
    wxi = ws.Wlam_xi

    def f_at(q, a):
        phase = np.exp(1j * ws.xi * q)
        return 2.0 * np.einsum("ij,ij->", wxi, (phase[None, :] * a).imag)

    forces[0] = f_at(0.0, alpha)
    for n in range(n_steps):
        q0, q1 = v * n * dt, v * (n + 1) * dt
        alpha = alpha - (0.5j * dt) * ws.lam * np.exp(-1j * ws.xi * q0)[None, :]
        alpha = alpha * rot
        alpha = alpha - (0.5j * dt) * ws.lam * np.exp(-1j * ws.xi * q1)[None, :]
        forces[n + 1] = f_at(q1, alpha)
    if not np.all(np.isfinite(forces)):
        raise BlowUpError("blow-up detected in clamped run")
    half, three_q = n_steps // 2, (3 * n_steps) // 4
    w1 = forces[half:three_q + 1].mean()
    w2 = forces[three_q:].mean()
    avg = forces[half:].mean()
    if abs(w1 - w2) > tol * max(abs(avg), 1e-300):
        raise TransientNotSettled(
            f"transient not settled: window averages {w1:.6g} and {w2:.6g} differ by more than {tol:g}"
        )
    return (avg, forces) if return_series else avg


def doubling_increments(record, n_windows=5):
    """Displacement gained over [T/2^(j+1), T/2^j], earliest window first.

    Returns ``(t_end, increments)``; the window ends are T/2^(n-1), ..., T/2, T.
    """
    T = record.t[-1]
    edges = T / 2.0 ** np.arange(n_windows, -1, -1)
    q = np.interp(edges, record.t, record.q)
    return edges[1:], np.diff(q)


def increment_exponent(record, n_windows=4):
    """Growth exponent of the displacement from its doubling-window increments.

    If q(t) ~ A t^s + B the increments over [t/2, t] scale as t^s for any
    constant B, so their log-log slope estimates s without the transient offset.
    """
    t_end, inc = doubling_increments(record, n_windows)
    if np.any(inc <= 0):
        raise ValueError("increments must be positive for a log-log fit")
    return float(np.polyfit(np.log(t_end), np.log(inc), 1)[0])


def displacement_slope(record, t_lo, t_hi):
    """Log-log slope of q(t) - q(0) against t on [t_lo, t_hi]."""
    sel = (record.t >= t_lo) & (record.t <= t_hi)
    d = record.q[sel] - record.q[0]
    return float(np.polyfit(np.log(record.t[sel]), np.log(d), 1)[0])
