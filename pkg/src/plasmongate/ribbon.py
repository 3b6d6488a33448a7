"""Quasistatic eigenmodes of a graphene nanoribbon.

The self-consistent potential across the ribbon satisfies
``M phi = eta^{-1} phi`` with ``M = V D``: ``D`` is the finite-difference
form of d/dθ f d/dθ - q^2 f with zero normal current at the edges and
``V`` is the cell-integrated 2 K0(q|θ-θ'|) Coulomb kernel. Here θ = x/W
and q = kW.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InputError, InsufficientModesError
from .numerics import bessel_k, eig_real_dense, struve_l

Q_MIN = 1e-6
NODE_FLOOR = 1e-9


@dataclass(frozen=True)
class RibbonGrid:
    width: float  # nm
    n_points: int = 200
    occupation: tuple | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise InputError("ribbon width must be > 0")
        if self.n_points < 50:
            raise InputError("n_points must be >= 50")
        if self.occupation is not None:
            occ = np.asarray(self.occupation, dtype=float)
            if occ.shape != (self.n_points,) or not np.all((occ == 0) | (occ == 1)):
                raise InputError("occupation must be a 0/1 vector of length n_points")

    @property
    def h(self) -> float:
        return 1.0 / (self.n_points - 1)

    @property
    def theta(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_points)

    @property
    def f(self) -> np.ndarray:
        if self.occupation is None:
            return np.ones(self.n_points)
        return np.asarray(self.occupation, dtype=float)

    def with_width(self, width: float) -> "RibbonGrid":
        return RibbonGrid(width, self.n_points, self.occupation)


@dataclass(frozen=True)
class RibbonModeSet:
    q: float
    etas: np.ndarray  # eta_n, negative
    potentials: np.ndarray  # (n_modes, N), unit Euclidean norm
    node_counts: tuple
    xi1: np.ndarray = field(default=None)  # nm
    xi3: np.ndarray = field(default=None)  # nm

    def __len__(self):
        return len(self.etas)

    def eta(self, n: int) -> float:
        """eta for the 1-based mode index ``n``."""
        if not 1 <= n <= len(self.etas):
            raise InsufficientModesError(f"mode n={n} not available (have {len(self.etas)})")
        return float(self.etas[n - 1])


def build_D(grid: RibbonGrid, q: float) -> np.ndarray:
    if q < 0:
        raise InputError("q must be >= 0")
    n, h, f = grid.n_points, grid.h, grid.f
    c = 1.0 / (2.0 * h * h)
    D = np.zeros((n, n))
    l = np.arange(1, n - 1)
    D[l, l - 1] = c * (f[l - 1] + f[l])
    D[l, l] = -c * (f[l - 1] + 2.0 * f[l] + f[l + 1])
    D[l, l + 1] = c * (f[l] + f[l + 1])
    D[0, 0] = -c * (f[0] + f[1])
    D[0, 1] = c * (f[0] + f[1])
    D[n - 1, n - 2] = c * (f[n - 2] + f[n - 1])
    D[n - 1, n - 1] = -c * (f[n - 2] + f[n - 1])
    D[np.arange(n), np.arange(n)] -= f * q * q
    return D


def _cell_primitive(t: np.ndarray, q: float) -> np.ndarray:
    # G(t) = 2 * int_0^t K0(q|s|) ds, odd in t; G(0) = 0
    out = np.zeros_like(t)
    nz = t != 0
    a = np.abs(t[nz])
    if q > Q_MIN:
        x = q * a
        out[nz] = np.pi * t[nz] * (bessel_k(0, x) * struve_l(-1, x) + bessel_k(1, x) * struve_l(0, x))
    else:
        # charge-neutral q -> 0 kernel: K0(q s) -> -log s
        out[nz] = 2.0 * t[nz] * (1.0 - np.log(a))
    return out


@lru_cache(maxsize=64)
def _v_row(n: int, q: float) -> np.ndarray:
    h = 1.0 / (n - 1)
    d = np.arange(n) * h
    row = _cell_primitive(d + 0.5 * h, q) - _cell_primitive(d - 0.5 * h, q)
    row.setflags(write=False)
    return row


def build_V(grid: RibbonGrid, q: float) -> np.ndarray:
    """Toeplitz matrix of the cell-integrated kernel 2 K0(q|θ_l - θ'|)."""
    if q < 0:
        raise InputError("q must be >= 0")
    n = grid.n_points
    row = _v_row(n, float(q))
    idx = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    return row[idx]


def count_nodes(v, floor: float = NODE_FLOOR) -> int:
    """Sign changes of ``v`` ignoring entries below ``floor`` in magnitude."""
    v = np.asarray(v)
    s = np.sign(v[np.abs(v) >= floor])
    return int(np.count_nonzero(s[1:] != s[:-1]))


@lru_cache(maxsize=256)
def _eigenmodes(n_points: int, occupation: tuple | None, q: float, n_max: int):
    grid = RibbonGrid(1.0, n_points, occupation)
    M = build_V(grid, q) @ build_D(grid, q)
    pairs = eig_real_dense(M, n_points, key=lambda lam: abs(lam))
    by_nodes = {}
    for lam, vec in pairs:
        if lam == 0 or abs(lam.imag) > 1e-8 * abs(lam) or lam.real >= 0:
            continue
        nodes = count_nodes(vec)
        # pairs arrive in ascending |lambda|: keep the first per node count
        by_nodes.setdefault(nodes, (1.0 / lam.real, vec))
    selected = [by_nodes[k] for k in sorted(by_nodes)][:n_max]
    if len(selected) < n_max:
        raise InsufficientModesError(f"only {len(selected)} physical modes found at q={q}")
    nodes = tuple(sorted(by_nodes)[:n_max])
    etas = np.array([s[0] for s in selected])
    phis = np.array([s[1] for s in selected])
    etas.setflags(write=False)
    phis.setflags(write=False)
    return etas, phis, nodes


def solve_modes(grid: RibbonGrid, q: float, n_max: int = 3) -> RibbonModeSet:
    """Lowest ``n_max`` transverse plasmon modes at normalised wavevector q.

    Modes are ordered by the node count of their potential (0, 1, 2, ...).
    The eigendecomposition is cached per ``(N, occupation, q)``.
    """
    if not 1 <= n_max <= 5:
        raise InputError("n_max must be in 1..5")
    etas, phis, nodes = _eigenmodes(grid.n_points, grid.occupation, float(q), n_max)
    modes = RibbonModeSet(q=float(q), etas=etas, potentials=phis, node_counts=nodes)
    xi1, xi3 = mode_fields_and_integrals(modes, grid)
    return RibbonModeSet(q=float(q), etas=etas, potentials=phis, node_counts=nodes, xi1=xi1, xi3=xi3)


def field_integrals(phi, q: float, width: float, h: float):
    """Return (xi1, xi3) for a transverse potential sampled on θ ∈ [0, 1].

    The potential is taken as W*phi(θ), so the mode field
    u = (dφ/dθ, i q φ) is dimensionless and both integrals are lengths.
    No normalisation is applied.
    """
    phi = np.asarray(phi, dtype=float)
    dphi = np.gradient(phi, h, edge_order=2)
    u2 = dphi * dphi + (q * phi) ** 2
    xi1 = width * np.trapezoid(u2, dx=h)
    xi3 = width * np.trapezoid(u2 * u2, dx=h)
    return float(xi1), float(xi3)


def continuum_normalise(phi, h: float) -> np.ndarray:
    """Rescale so that ∫_0^1 φ(θ)^2 dθ = 1, independent of the grid size."""
    phi = np.asarray(phi, dtype=float)
    return phi / np.sqrt(np.trapezoid(phi * phi, dx=h))


def mode_fields_and_integrals(modes: RibbonModeSet, grid: RibbonGrid):
    """xi1 = ∫dx |u|^2 and xi3 = ∫dx |u|^4 per mode (both in nm)."""
    xi1, xi3 = [], []
    for phi in modes.potentials:
        a, b = field_integrals(continuum_normalise(phi, grid.h), modes.q, grid.width, grid.h)
        xi1.append(a)
        xi3.append(b)
    return np.array(xi1), np.array(xi3)


def mode_table(modes: RibbonModeSet, grid: RibbonGrid):
    """Rows of (θ, φ_1(θ), ..., φ_n(θ)) for CSV export."""
    return [[float(t)] + [float(p[i]) for p in modes.potentials] for i, t in enumerate(grid.theta)]
