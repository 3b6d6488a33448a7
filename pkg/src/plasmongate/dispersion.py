"""Plasmon branches of a nanoribbon and their local quadratic expansion.

A mode n at wavevector k satisfies

    -eta_n(kW) = Im sigma(omega) e^2 / (eps_eff hbar omega W)

with sigma in units of e^2/hbar. Energies are hbar*omega in eV, wavevectors
in nm^-1, velocities in nm/fs and masses in eV fs^2 / nm^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from . import units
from .conductivity import Material, plasma_frequency, sigma1
from .errors import BracketError, InputError, NoSolutionError
from .numerics import Tolerance, find_root_bisect
from .ribbon import RibbonGrid, solve_modes

OMEGA_FLOOR = 1e-4  # eV
PLASMA_MARGIN = 1e-6  # eV
STENCIL_STEP = 1e-3  # relative to k_p
_ROOT_TOL = Tolerance(abs_tol=0.0, rel_tol=1e-15, max_iter=200)


@dataclass(frozen=True)
class DispersionBranch:
    n: int
    k_grid: np.ndarray  # nm^-1, truncated at termination_index
    omega: np.ndarray  # hbar*omega, eV
    landau_intra: np.ndarray
    landau_inter: np.ndarray
    above_phonon: np.ndarray
    grid: RibbonGrid
    material: Material
    model: str = "lrpa"
    termination_index: int | None = None  # first k without a solution
    monotone: bool = True

    def __len__(self):
        return len(self.k_grid)


@dataclass(frozen=True)
class LocalExpansion:
    k_p: float  # nm^-1
    omega_p: float  # eV
    v_g: float  # nm/fs
    mass: float  # eV fs^2 / nm^2
    v_bar: float  # nm/fs
    curvature: float  # d^2(hbar omega)/dk^2, eV nm^2

    @property
    def negative_mass(self) -> bool:
        return not self.curvature > 0


@lru_cache(maxsize=64)
def _plasma(m: Material) -> float:
    return plasma_frequency(m)


def dispersion_residual(omega: float, eta: float, width: float, m: Material, model: str = "lrpa") -> float:
    """-eta - Im sigma e^2/(eps hbar omega W); zero on the branch."""
    s = sigma1(omega, m.lossless(), model)
    return -eta - s.imag * units.E2 / (m.eps_eff * omega * width)


def drude_omega(eta: float, width: float, m: Material) -> float:
    """Closed-form root of the dispersion condition for Drude conductivity."""
    return math.sqrt(m.fermi_energy * units.E2 / (math.pi * m.eps_eff * width * (-eta)))


def _eta(n: int, k: float, grid: RibbonGrid) -> float:
    if not k > 0:
        raise InputError("k must be > 0")
    return solve_modes(grid, k * grid.width, n_max=max(n, 1)).eta(n)


def _solve_from_eta(eta: float, width: float, m: Material, model: str, lower: float | None = None) -> float:
    if model == "drude":
        # Im sigma / omega is unbounded above; no plasma cut-off
        hi = 2.0 * drude_omega(eta, width, m)
        lo = OMEGA_FLOOR
    else:
        hi = _plasma(m.lossless()) - PLASMA_MARGIN
        lo = OMEGA_FLOOR

    def g(w):
        return dispersion_residual(w, eta, width, m, model)

    if lower is not None and lo < lower < hi:
        try:
            return find_root_bisect(g, lower, hi, _ROOT_TOL)
        except BracketError:
            pass
    try:
        return find_root_bisect(g, lo, hi, _ROOT_TOL)
    except BracketError as exc:
        raise NoSolutionError(f"no plasmon root below {hi:.6g} eV (eta={eta:.6g})") from exc


def solve_omega(n: int, k: float, grid: RibbonGrid, m: Material, model: str = "lrpa") -> float:
    """hbar*omega (eV) of mode ``n`` at wavevector ``k`` (nm^-1).

    Uses bisection on (1e-4 eV, hbar*omega_plasma - 1e-6 eV) with the
    lossless conductivity. Raises ``NoSolutionError`` when the mode is cut
    off.
    """
    return _solve_from_eta(_eta(n, k, grid), grid.width, m, model)


def damping_flags(omega: float, k: float, m: Material):
    """(landau_intra, landau_inter, above_phonon) for a branch point."""
    vk = units.HBAR * m.fermi_velocity * k
    return (omega <= vk, omega >= 2.0 * m.fermi_energy - vk, omega > units.PHONON_ENERGY)


def trace_branch(
    n: int,
    k_min: float,
    k_max: float,
    n_points: int,
    grid: RibbonGrid,
    m: Material,
    model: str = "lrpa",
) -> DispersionBranch:
    """Solve mode ``n`` on an even k grid, warm-starting each bracket.

    The branch stops at the first k without a root; ``termination_index``
    records where. Non-monotone branches are reported through
    ``monotone=False`` and a warning, not corrected.
    """
    if n_points < 8:
        raise InputError("n_points must be >= 8")
    if not 0 < k_min < k_max:
        raise InputError("need 0 < k_min < k_max")
    ks = np.linspace(k_min, k_max, n_points)
    omegas, stop = [], None
    prev = None
    for i, k in enumerate(ks):
        try:
            w = _solve_from_eta(_eta(n, float(k), grid), grid.width, m, model, lower=prev)
        except NoSolutionError:
            stop = i
            break
        omegas.append(w)
        prev = w
    ks = ks[: len(omegas)]
    omega = np.array(omegas)
    flags = np.array([damping_flags(w, k, m) for w, k in zip(omega, ks)], dtype=bool).reshape(-1, 3)
    monotone = bool(np.all(np.diff(omega) > 0))
    if not monotone:
        warnings.warn(f"branch n={n} is not monotone in k", RuntimeWarning, stacklevel=2)
    return DispersionBranch(
        n=n,
        k_grid=ks,
        omega=omega,
        landau_intra=flags[:, 0],
        landau_inter=flags[:, 1],
        above_phonon=flags[:, 2],
        grid=grid,
        material=m,
        model=model,
        termination_index=stop,
        monotone=monotone,
    )


def expand_dispersion(omega_fn: Callable[[float], float], k_p: float, delta: float | None = None) -> LocalExpansion:
    """Local quadratic expansion of ``omega_fn`` (k -> hbar*omega in eV).

    Five-point central stencils with step ``delta`` (default 1e-3 k_p) give
    v_g = d(hbar omega)/dk / hbar and m = hbar^2 / d^2(hbar omega)/dk^2.
    """
    if not k_p > 0:
        raise InputError("k_p must be > 0")
    d = STENCIL_STEP * k_p if delta is None else delta
    f = [omega_fn(k_p + j * d) for j in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * d)
    d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * d * d)
    hbar = units.HBAR
    v_g = d1 / hbar
    mass = hbar * hbar / d2 if d2 != 0 else math.inf
    return LocalExpansion(
        k_p=k_p,
        omega_p=f[2],
        v_g=v_g,
        mass=mass,
        v_bar=v_g - hbar * k_p / mass,
        curvature=d2,
    )


def expand_mode(n: int, k_p: float, grid: RibbonGrid, m: Material, model: str = "lrpa") -> LocalExpansion:
    """Local expansion of mode ``n`` at ``k_p`` by re-solving nearby points."""
    return expand_dispersion(lambda k: solve_omega(n, k, grid, m, model), k_p)


def local_expansion(branch: DispersionBranch, k_p: float) -> LocalExpansion:
    """Local expansion at ``k_p``, which must sit inside the traced branch."""
    ks = branch.k_grid
    if np.count_nonzero(ks < k_p) < 2 or np.count_nonzero(ks > k_p) < 2:
        raise InputError("k_p needs at least two branch points on each side")
    return expand_mode(branch.n, k_p, branch.grid, branch.material, branch.model)


def effective_mass_kg(le: LocalExpansion) -> float:
    if not math.isfinite(le.mass):
        raise InputError("effective mass is not finite")
    return le.mass * units.EV_FS2_PER_NM2_IN_KG


def branch_velocities(branch: DispersionBranch) -> np.ndarray:
    """v_g (nm/fs) at each branch point from local re-solves."""
    return np.array([expand_mode(branch.n, float(k), branch.grid, branch.material, branch.model).v_g for k in branch.k_grid])


BRANCH_COLUMNS = ("n", "k_nm_inv", "kW", "hbar_omega_eV", "v_g_nm_fs", "landau_intra", "landau_inter", "above_phonon")


def branch_rows(branch: DispersionBranch, v_g: np.ndarray | None = None):
    if v_g is None:
        v_g = branch_velocities(branch)
    w = branch.grid.width
    return [
        (branch.n, float(k), float(k * w), float(om), float(v), bool(a), bool(b), bool(c))
        for k, om, v, a, b, c in zip(
            branch.k_grid, branch.omega, v_g, branch.landau_intra, branch.landau_inter, branch.above_phonon
        )
    ]
