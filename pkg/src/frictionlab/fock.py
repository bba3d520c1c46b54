"""Fiber Hamiltonian H(P) = (P - dGamma(xi))^2 + dGamma(|k|) + g Phi(h0) on a truncated Fock space.

One-boson space: a tensor grid of radial momenta k (3-D radial weight
4 pi k^2 dk) and particle-space frequencies xi (d = 1). Discrete creation
operators carry the square root of the node weight, a*(f)|n> has the
entry sqrt(w_i) f_i sqrt(n_i + 1) on |n + e_i>, so weighted sums replace
L^2 pairings and [a(f), a*(f)] = sum w |f|^2.

States with at most ``n_max`` bosons are multisets of node indices. Within
a number sector they are ordered lexicographically by the index tuple
written in decreasing order; this is the colexicographic order of the
increasing tuple and has the closed-form rank sum_j C(i_j + j - 1, j).
"""

from dataclasses import dataclass
from itertools import combinations_with_replacement
import math

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import CouplingRegimeError, DimensionCapExceeded, EigensolverError
from .formfactor import coupling_h

DEFAULT_DIMENSION_CAP = 600_000


@dataclass(frozen=True)
class SingleBosonGrid:
    """Flattened (k, xi) nodes with quadrature weights, k-major order."""

    k: np.ndarray
    xi: np.ndarray
    weights: np.ndarray
    n_k: int
    n_xi: int

    def __post_init__(self):
        if np.any(self.k <= 0):
            raise ValueError("k nodes must be positive")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be positive")
        if not (self.k.shape == self.xi.shape == self.weights.shape):
            raise ValueError("node arrays must have equal shapes")

    @classmethod
    def log_grid(cls, k_min=1e-2, k_max=6.0, ratio=2.0, xi_step=0.5, xi_max=3.0):
        """k = ratio^j inside [k_min, k_max], xi = j xi_step inside [-xi_max, xi_max].

        Nodes are anchored at k = 1 and xi = 0, so lowering ``k_min`` or raising
        ``xi_max`` yields a superset of nodes with unchanged weights.
        """
        if ratio <= 1 or xi_step <= 0 or k_min <= 0 or k_max <= k_min:
            raise ValueError("invalid grid parameters")
        lr = math.log(ratio)
        j = np.arange(math.ceil(math.log(k_min) / lr - 1e-9), math.floor(math.log(k_max) / lr + 1e-9) + 1)
        k = ratio ** j.astype(float)
        m = int(math.floor(xi_max / xi_step + 1e-9))
        xi = xi_step * np.arange(-m, m + 1, dtype=float)
        wk = 4.0 * math.pi * k**3 * lr
        return cls.from_tensor(k, wk, xi, np.full(xi.size, xi_step))

    @classmethod
    def from_tensor(cls, k, wk, xi, wxi):
        kk, xx = np.meshgrid(np.asarray(k, float), np.asarray(xi, float), indexing="ij")
        ww = np.outer(wk, wxi)
        return cls(kk.ravel(), xx.ravel(), ww.ravel(), len(k), len(xi))

    @classmethod
    def from_nodes(cls, k, xi, weights):
        k = np.asarray(k, float)
        return cls(k, np.asarray(xi, float), np.asarray(weights, float), k.size, 1)

    @property
    def n_modes(self):
        return self.k.size

    @property
    def k_min(self):
        return float(self.k.min())

    @property
    def xi_max(self):
        return float(np.abs(self.xi).max())

    def h0(self, model):
        """Real coupling function h0 at the nodes."""
        return coupling_h(0.0, self.k, self.xi, model).real

    def norm(self, f):
        return float(np.sqrt(np.sum(self.weights * np.abs(f) ** 2)))


def _binom(x, j):
    """Elementwise C(x, j) for an int64 array and a small integer j."""
    out = np.ones_like(x)
    for t in range(j):
        out = out * (x - t) // (t + 1)
    return out


class FockBasis:
    """Occupation states with at most ``n_max`` bosons over ``n_modes`` nodes."""

    def __init__(self, n_modes, n_max, cap=DEFAULT_DIMENSION_CAP):
        if n_max < 0:
            raise ValueError("n_max must be nonnegative")
        self.n_modes, self.n_max = int(n_modes), int(n_max)
        sizes = [math.comb(self.n_modes + n - 1, n) for n in range(self.n_max + 1)]
        if sum(sizes) > cap:
            raise DimensionCapExceeded(
                f"dimension cap exceeded: {sum(sizes)} states for {n_modes} modes, n_max = {n_max} (cap {cap})"
            )
        self.sizes = sizes
        self.offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        self.sectors = []
        for n in range(self.n_max + 1):
            if n == 0:
                self.sectors.append(np.zeros((1, 0), dtype=np.int64))
                continue
            S = np.array(list(combinations_with_replacement(range(self.n_modes), n)), dtype=np.int64)
            S = S.reshape(-1, n)
            order = np.argsort(self._rank(S), kind="stable")
            self.sectors.append(S[order])
        self._creation = None

    @property
    def dimension(self):
        return int(self.offsets[-1])

    @staticmethod
    def _rank(S):
        n = S.shape[1]
        r = np.zeros(S.shape[0], dtype=np.int64)
        for j in range(n):
            r += _binom(S[:, j] + j, j + 1)
        return r

    def index(self, S):
        """Basis indices of increasing-sorted multisets ``S`` (shape (m, n))."""
        S = np.asarray(S, dtype=np.int64)
        if S.ndim == 1:
            S = S[None, :]
        return self.offsets[S.shape[1]] + self._rank(S)

    def state(self, idx):
        """Sorted tuple of node indices of basis state ``idx``."""
        n = int(np.searchsorted(self.offsets, idx, side="right") - 1)
        return tuple(int(i) for i in self.sectors[n][idx - self.offsets[n]])

    def number(self):
        """Boson number of every basis state."""
        return np.repeat(np.arange(self.n_max + 1), self.sizes)

    def sector_slices(self):
        return [slice(int(self.offsets[n]), int(self.offsets[n + 1])) for n in range(self.n_max + 1)]

    def totals(self, values):
        """Per-state sums of a one-boson quantity (e.g. xi or |k|)."""
        values = np.asarray(values, dtype=float)
        parts = [values[S].sum(axis=1) if S.shape[1] else np.zeros(1) for S in self.sectors]
        return np.concatenate(parts)

    def creation_structure(self):
        """Sparse pattern of a*: (rows, cols, mode, sqrt(n_i + 1)), cached."""
        if self._creation is None:
            rows, cols, modes, bose = [], [], [], []
            B = self.n_modes
            for n in range(self.n_max):
                S = self.sectors[n]
                st = np.repeat(np.arange(S.shape[0]), B)
                i = np.tile(np.arange(B), S.shape[0])
                new = np.sort(np.concatenate([S[st], i[:, None]], axis=1), axis=1)
                count = (S[st] == i[:, None]).sum(axis=1)
                rows.append(self.index(new))
                cols.append(self.offsets[n] + st)
                modes.append(i)
                bose.append(np.sqrt(count + 1.0))
            self._creation = tuple(np.concatenate(a) for a in (rows, cols, modes, bose))
        return self._creation


@dataclass
class FockOperator:
    """Sparse Hermitian operator on a truncated Fock space.

    ``structure`` optionally records an arrow form (vacuum plus one boson),
    which ``lowest_eigenpair`` solves through its secular equation.
    """

    matrix: sp.csr_matrix
    label: str = ""
    structure: dict = None

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def hermiticity_error(self):
        d = self.matrix - self.matrix.conj().T
        return float(np.abs(d.data).max()) if d.nnz else 0.0

    def norm_estimate(self):
        """Max absolute row sum, an upper bound on the spectral norm."""
        return float(np.abs(self.matrix).sum(axis=1).max())

    def to_dense(self):
        return self.matrix.toarray()

    def dump_triplets(self, path):
        """Write nonzero entries as ``row col re im`` lines (0-based indices)."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w") as fh:
            fh.write(f"# {self.label} dimension={self.dimension} nnz={coo.nnz}\n")
            fh.write("# row col re im\n")
            for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{r} {c} {complex(v).real:.17g} {complex(v).imag:.17g}\n")

    @staticmethod
    def load_triplets(path):
        data = np.loadtxt(path, comments="#", ndmin=2)
        with open(path) as fh:
            head = fh.readline()
        dim = int(head.split("dimension=")[1].split()[0])
        vals = data[:, 2] + 1j * data[:, 3] if data.size else np.zeros(0)
        m = sp.csr_matrix((vals, (data[:, 0].astype(int), data[:, 1].astype(int))), shape=(dim, dim))
        return FockOperator(m, head[2:].split(" dimension=")[0])


def creation_operator(basis, grid, f):
    rows, cols, modes, bose = basis.creation_structure()
    f = np.asarray(f)
    vals = np.sqrt(grid.weights[modes]) * f[modes] * bose
    n = basis.dimension
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def assemble_Phi(basis, grid, f, label="Phi"):
    """Field operator Phi(f) = a*(f) + a(f)."""
    A = creation_operator(basis, grid, f)
    return FockOperator((A + A.conj().T).tocsr(), label)


def assemble_N(basis):
    n = basis.number().astype(float)
    return FockOperator(sp.diags(n, format="csr"), "N")


def vacuum_projector(basis):
    m = sp.csr_matrix(([1.0], ([0], [0])), shape=(basis.dimension, basis.dimension))
    return FockOperator(m, "Pi_Omega")


def free_diagonal(P, basis, grid):
    """(P - sum xi)^2 + sum |k| for every basis state."""
    return (P - basis.totals(grid.xi)) ** 2 + basis.totals(grid.k)


def assemble_H(P, model, grid, n_max=2, basis=None, cap=DEFAULT_DIMENSION_CAP):
    """H(P) on states with at most ``n_max`` bosons (d = 1)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if model.d != 1:
        raise ValueError("Fock-space assembly is implemented for d = 1")
    basis = basis or FockBasis(grid.n_modes, n_max, cap)
    P = float(np.asarray(P).reshape(-1)[0])
    diag = free_diagonal(P, basis, grid)
    diag[0] = P * P
    h0 = grid.h0(model)
    H = sp.diags(diag, format="csr")
    if model.g != 0:
        A = creation_operator(basis, grid, model.g * h0)
        H = (H + A + A.T).tocsr()
    structure = None
    if basis.n_max == 1:
        structure = {"kind": "arrow", "d0": diag[0], "diag": diag[1:], "b": model.g * np.sqrt(grid.weights) * h0}
    return FockOperator(H, f"H(P={P:g})", structure)


@dataclass(frozen=True)
class EigenResult:
    energy: float
    vector: np.ndarray
    residual: float
    method: str


def _arrow_ground(s):
    d0, D, b = s["d0"], s["diag"], s["b"]
    lo_diag = float(D.min())
    if not np.any(b):
        E = min(d0, lo_diag)
        v = np.zeros(D.size + 1)
        v[0 if d0 <= lo_diag else 1 + int(np.argmin(D))] = 1.0
        return E, v

    def f(E):
        return E - d0 - np.sum(b * b / (E - D))

    hi = np.nextafter(lo_diag, -np.inf)
    if f(hi) <= 0:
        # the root lies within one float spacing of min(D): the lowest level is
        # the free one-boson state, dressed to first order in b
        j = int(np.argmin(D))
        E = lo_diag
        v = np.zeros(D.size + 1)
        v[1 + j] = 1.0
        v[0] = b[j] / (E - d0) if E != d0 else 0.0
        rest = np.arange(D.size) != j
        v[1:][rest] = b[rest] * v[0] / (E - D[rest])
        return E, v / np.linalg.norm(v)
    lo = min(d0, lo_diag) - float(np.sqrt(np.sum(b * b))) - 1.0
    E = scipy.optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    v = np.concatenate([[1.0], b / (E - D)])
    return E, v / np.linalg.norm(v)


def lowest_eigenpair(op, tol=1e-10, seeds=(0, 1), dense_max=1500, maxiter=20000, ncv=None):
    """Lowest eigenvalue and eigenvector of a Hermitian ``FockOperator``.

    Arrow-structured operators are solved exactly through their secular
    equation, small ones densely, and large ones by implicitly restarted
    Lanczos (ARPACK) from each seed; runs that disagree by more than
    ``tol * ||op||`` raise ``EigensolverError``.
    """
    H = op.matrix
    scale = max(op.norm_estimate(), 1e-300)
    if op.structure and op.structure.get("kind") == "arrow":
        E, v = _arrow_ground(op.structure)
        method = "secular"
    elif op.dimension <= dense_max:
        w, V = scipy.linalg.eigh(op.to_dense(), subset_by_index=[0, 0])
        E, v, method = float(w[0]), V[:, 0], "dense"
    else:
        # ARPACK can miss an eigenvalue that is exactly 0, so the spectrum is
        # shifted above 1 using a Gershgorin lower bound
        absrow = np.asarray(np.abs(H).sum(axis=1)).ravel()
        diag = H.diagonal().real
        shift = 1.0 - float(np.min(diag - (absrow - np.abs(diag))))
        Hs = (H + shift * sp.identity(op.dimension, format="csr")).tocsr()
        found = []
        for seed in seeds:
            rng = np.random.default_rng(seed)
            v0 = rng.standard_normal(op.dimension)
            try:
                w, V = spla.eigsh(Hs, k=1, which="SA", v0=v0, tol=tol * 1e-2, maxiter=maxiter, ncv=ncv)
            except spla.ArpackNoConvergence as exc:
                raise EigensolverError(f"eigensolver did not converge (seed {seed}): {exc}") from exc
            found.append((float(w[0]) - shift, V[:, 0]))
        Es = [e for e, _ in found]
        if max(Es) - min(Es) > tol * scale:
            raise EigensolverError(f"eigensolver seeds disagree: {Es}")
        E, v = min(found, key=lambda t: t[0])
        method = "lanczos"
    v = np.asarray(v)
    i = int(np.argmax(np.abs(v)))
    v = v * (abs(v[i]) / v[i])  # fix the global phase
    res = float(np.linalg.norm(H @ v - E * v))
    if res > max(tol, 1e-13) * scale:
        raise EigensolverError(f"eigensolver residual {res:.2e} exceeds tolerance")
    return EigenResult(float(E), v, res, method)


@dataclass(frozen=True)
class SpectralReport:
    energy: float
    sector_norms: tuple
    vacuum_overlap: float
    mean_number: float
    residual: float


def spectral_report(result, basis):
    p = np.abs(result.vector) ** 2
    p = p / p.sum()
    sectors = tuple(float(p[s].sum()) for s in basis.sector_slices())
    return SpectralReport(result.energy, sectors, float(p[0]), float(p @ basis.number()), result.residual)


@dataclass(frozen=True)
class PT2Result:
    real: float
    imag: float
    n_excluded: int


def pt2_energy(P, model, grid, resonance_tol=1e-12):
    """Second-order energy P^2 - g^2 sum w h0^2 / ((P - xi)^2 - P^2 + |k|).

    Nodes with a vanishing denominator are left out and counted. For P != 0
    the imaginary part -g^2 c(P) comes from the continuum Fermi Golden Rule.
    """
    P = float(np.asarray(P).reshape(-1)[0])
    h0 = grid.h0(model)
    den = (P - grid.xi) ** 2 - P * P + grid.k
    bad = np.abs(den) <= resonance_tol * np.maximum(grid.k, 1.0)
    s = np.sum(grid.weights[~bad] * h0[~bad] ** 2 / den[~bad])
    real = P * P - model.g**2 * s
    imag = 0.0
    if P != 0.0 and model.g != 0.0:
        from .fgr import c_of_P

        imag = -model.g**2 * c_of_P(P, model)
    return PT2Result(float(real), float(imag), int(bad.sum()))


def ground_energy(P, model, grid, n_max=2, tol=1e-10):
    return lowest_eigenpair(assemble_H(P, model, grid, n_max), tol).energy


def flatness_probe(P_list, model, grids, n_max=2, tol=1e-10):
    """E(P) - E(0) of the truncated H(P) along a ladder of refined grids.

    Returns rows (level, P, k_min, xi_max, E_P, E_0, gap).
    """
    rows = []
    for level, grid in enumerate(grids):
        basis = FockBasis(grid.n_modes, n_max)
        e0 = lowest_eigenpair(assemble_H(0.0, model, grid, n_max, basis), tol).energy
        for P in P_list:
            eP = e0 if P == 0 else lowest_eigenpair(assemble_H(P, model, grid, n_max, basis), tol).energy
            rows.append((level, float(P), grid.k_min, grid.xi_max, eP, e0, eP - e0))
    return rows


@dataclass(frozen=True)
class IRProbeRow:
    mu: float
    k_min: float
    amplitude_norm: float
    pt_sum: float


def ir_amplitude(model, grid, n_max=1, tol=1e-10):
    """One-boson weight of the P = 0 ground state on the xi = 0 column.

    Returns sum_k |psi(k, 0)|^2 / (w_xi g^2 |psi_vac|^2), which the
    pull-through formula relates to int d^3k |h0(k, 0)|^2 / |k|^2, and that
    perturbative sum on the same nodes.
    """
    res = lowest_eigenpair(assemble_H(0.0, model, grid, n_max), tol)
    col = np.isclose(grid.xi, 0.0)
    if not col.any():
        raise ValueError("grid has no xi = 0 node")
    v = res.vector
    # the amplitude of node i is sqrt(w_i) psi(k_i, 0), so summing |amp|^2
    # is the L^2(d^3k) norm on the column times its xi-cell width
    amp = v[1:1 + grid.n_modes][col]
    u0 = _xi_weight(grid)
    norm = float(np.sum(np.abs(amp) ** 2) / (u0 * model.g**2 * abs(v[0]) ** 2))
    h = grid.h0(model)[col]
    pt = float(np.sum(grid.weights[col] / u0 * h**2 / grid.k[col] ** 2))
    return norm, pt


def _xi_weight(grid):
    """Common xi-cell width of a tensor grid."""
    if grid.n_xi < 2:
        raise ValueError("tensor grid needed")
    xi = grid.xi[: grid.n_xi]
    return float(xi[1] - xi[0])


def ir_ground_state_probe(mu_list, k_min_list, model, grid_kwargs=None, n_max=1):
    """IR scaling of the xi = 0 one-boson amplitude of the P = 0 ground state.

    Returns (rows, fits); fits[mu] holds the log-log slope, the R^2 of a
    linear fit against ln(1/k_min) and the largest ratio between successive
    k_min values.
    """
    kw = dict(k_max=6.0, ratio=2.0, xi_step=0.5, xi_max=3.0)
    kw.update(grid_kwargs or {})
    rows, fits = [], {}
    for mu in mu_list:
        m = model.replace(mu=mu)
        vals = []
        for k_min in k_min_list:
            grid = SingleBosonGrid.log_grid(k_min=k_min, **kw)
            amp, pt = ir_amplitude(m, grid, n_max)
            rows.append(IRProbeRow(mu, grid.k_min, amp, pt))
            vals.append((grid.k_min, amp))
        km, a = np.array(vals).T
        slope = np.polyfit(np.log(km), np.log(a), 1)[0]
        x = np.log(1.0 / km)
        coef = np.polyfit(x, a, 1)
        r2 = 1.0 - np.sum((a - np.polyval(coef, x)) ** 2) / np.sum((a - a.mean()) ** 2)
        order = np.argsort(-km)
        ratios = a[order][1:] / a[order][:-1]
        fits[mu] = {"slope": float(slope), "log_r2": float(r2), "max_ratio": float(ratios.max())}
    return rows, fits


def i_a_h0(model, grid):
    """i (a h0) = -(1/|k|) d/dk (|k| h0) at the nodes, a real function."""
    k, mu = grid.k, model.mu
    r1 = model.rho1_hat(np.abs(grid.xi))
    r2, dr2 = model.rho2_hat(k), model.rho2_hat.derivative(k)
    return -r1 * ((mu + 1.0) * k ** (mu - 1.0) * r2 + k**mu * dr2)


@dataclass(frozen=True)
class MourreReport:
    g: float
    norm_ah0: float
    c0: float
    C: float
    lambda_min: float
    margin: float
    holds: bool


def mourre_check(model, grid, n_max=2, g=None, tol=1e-8):
    """Lowest eigenvalue of N - g Phi(i a h0) + (1 - |g| ||a h0||) Pi_Omega against 1 - 2 |g| ||a h0||."""
    g = model.g if g is None else g
    f = i_a_h0(model, grid)
    norm = grid.norm(f)
    if abs(g) * norm >= 0.5:
        raise CouplingRegimeError(
            f"outside small-coupling regime: |g| ||a h0|| = {abs(g) * norm:.4g} >= 1/2"
        )
    basis = FockBasis(grid.n_modes, n_max)
    C = 1.0 - abs(g) * norm
    c0 = 1.0 - 2.0 * abs(g) * norm
    M = assemble_N(basis).matrix - g * assemble_Phi(basis, grid, f).matrix + C * vacuum_projector(basis).matrix
    lam = lowest_eigenpair(FockOperator(M.tocsr(), "Mourre"), tol=1e-12).energy
    return MourreReport(g, norm, c0, C, lam, lam - c0, bool(lam >= c0 - tol))
