"""CZ gate figures of merit and (W, E_F) sweeps.

A gate point composes the whole chain: ribbon mode -> dispersion and local
expansion at k_p = kW/W -> two-plasmon loss gamma2 -> S-matrix -> pulse
fidelity F -> success probability

    P_succ = F exp(-2 gamma1 tau) P_p(L),   tau = L / v_g,  gamma1 = omega_p / Q,

with the ribbon length L chosen to maximise P_succ.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import units
from .conductivity import Material, Sigma3Model
from .dispersion import damping_flags, expand_mode
from .errors import InputError, InsufficientModesError, InvalidNormalizationError, NoSolutionError
from .numerics import erf, golden_section_max
from .rates import gamma1_from_q, gamma2
from .ribbon import RibbonGrid, solve_modes
from .scattering import GaussianPulse, ScatterParams, fidelity, nonadmissible_weight

# primary mask reasons, highest priority first
MASK_REASONS = (
    "no_solution",
    "invalid_normalization",
    "landau_intra",
    "landau_inter",
    "phonon",
    "negative_mass",
    "non_admissible",
)

L_SEARCH = (0.2, 10.0)  # in units of sigma
L_ITERATIONS = 80


def containment_probability(L: float, sigma: float, delta_l: float = 0.0, literal: bool = False) -> float:
    """Probability that a pulse of width ``sigma`` centred at ``delta_l`` lies in [-L/2, L/2].

    Uses 1/2 [erf((dL + L/2)/(2 sigma)) - erf((dL - L/2)/(2 sigma))].
    ``literal=True`` drops the second erf, reproducing a known misprint of
    this formula, for comparison only.
    """
    if not L > 0 or not sigma > 0:
        raise InputError("L and sigma must be > 0")
    a = (delta_l + 0.5 * L) / (2.0 * sigma)
    b = (delta_l - 0.5 * L) / (2.0 * sigma)
    if literal:
        return 0.5 * (erf(a) - b)
    return 0.5 * (erf(a) - erf(b))


def success_probability(F: float, gamma1: float, tau: float, P_p: float) -> float:
    """F exp(-2 gamma1 tau) P_p with hbar*gamma1 in eV and tau in fs."""
    return F * math.exp(-2.0 * (gamma1 / units.HBAR) * tau) * P_p


@dataclass(frozen=True)
class GateSettings:
    n: int = 2
    kW: float = 1.0
    delta_k: float = 0.9
    Q: float = 1000.0
    delta_l: float = 0.0  # nm
    n_points: int = 200
    eps_eff: float = 1.0
    fermi_velocity: float = units.V_FERMI
    sigma3: Sigma3Model = field(default_factory=Sigma3Model)
    literal_containment: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise InputError("mode index n must be >= 1")
        for name in ("kW", "delta_k", "Q"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be > 0")


@dataclass
class GatePoint:
    W: float
    E_F: float
    n: int
    kW: float
    Q: float
    delta_l: float
    L: float = math.nan
    sigma: float = math.nan
    k_p: float = math.nan
    omega_p: float = math.nan
    v_g: float = math.nan
    mass: float = math.nan
    v_bar: float = math.nan
    gamma1: float = math.nan
    gamma2: float = math.nan
    lambda_a: float = math.nan
    F: float = math.nan
    P_p: float = math.nan
    P_succ: float | None = None
    nonadmissible_weight: float = math.nan
    fermi_length: float = math.nan
    landau: bool = False
    phonon: bool = False
    negative_mass: bool = False
    non_admissible: bool = False
    mask: str = ""

    @property
    def masked(self) -> bool:
        return bool(self.mask)


GATE_COLUMNS = tuple(f.name for f in fields(GatePoint))


def _optimal_length(F, gamma1, v_g, sigma, delta_l, literal):
    def objective(L):
        return success_probability(F, gamma1, L / v_g, containment_probability(L, sigma, delta_l, literal))

    return golden_section_max(objective, L_SEARCH[0] * sigma, L_SEARCH[1] * sigma, L_ITERATIONS)


def evaluate_gate_point(W: float, E_F: float, settings: GateSettings = GateSettings(), L: float | None = None) -> GatePoint:
    """Evaluate one (W, E_F) point; ``L=None`` optimises the ribbon length.

    Points outside the model's validity get ``P_succ=None`` and a single
    primary reason code in ``mask``.
    """
    s = settings
    p = GatePoint(W=W, E_F=E_F, n=s.n, kW=s.kW, Q=s.Q, delta_l=s.delta_l)
    m = Material(E_F, 0.0, s.fermi_velocity, s.eps_eff)
    grid = RibbonGrid(W, s.n_points)
    p.k_p = s.kW / W
    p.sigma = W / s.delta_k
    p.fermi_length = 2.0 * math.pi * units.HBAR * s.fermi_velocity / E_F
    try:
        le = expand_mode(s.n, p.k_p, grid, m)
    except (NoSolutionError, InsufficientModesError):
        p.mask = "no_solution"
        return p
    p.omega_p, p.v_g, p.mass, p.v_bar = le.omega_p, le.v_g, le.mass, le.v_bar
    intra, inter, phonon = damping_flags(le.omega_p, p.k_p, m)
    p.landau = bool(intra or inter)
    p.phonon = bool(phonon)
    p.negative_mass = le.negative_mass
    try:
        modes = solve_modes(grid, s.kW, n_max=s.n)
        p.gamma2 = gamma2(modes, s.n, le.omega_p, m, s.sigma3)
    except InvalidNormalizationError:
        p.mask = "invalid_normalization"
        return p
    sp = ScatterParams.from_expansion(le, p.gamma2)
    p.lambda_a = sp.lambda_a
    p.non_admissible = bool(p.lambda_a < 0)
    pulse = GaussianPulse.for_ribbon(p.k_p, W, s.delta_k)
    p.F = fidelity(pulse, sp)
    p.nonadmissible_weight = nonadmissible_weight(pulse, sp)
    p.gamma1 = gamma1_from_q(le.omega_p, s.Q)
    for reason, flagged in (
        ("landau_intra", intra),
        ("landau_inter", inter),
        ("phonon", phonon),
        ("negative_mass", p.negative_mass),
        ("non_admissible", p.non_admissible),
    ):
        if flagged:
            p.mask = reason
            return p
    if L is None:
        p.L, _ = _optimal_length(p.F, p.gamma1, p.v_g, p.sigma, s.delta_l, s.literal_containment)
    else:
        p.L = float(L)
    p.P_p = containment_probability(p.L, p.sigma, s.delta_l, s.literal_containment)
    p.P_succ = success_probability(p.F, p.gamma1, p.L / p.v_g, p.P_p)
    return p


@dataclass(frozen=True)
class SweepGrid:
    W_min: float = 10.0
    W_max: float = 40.0
    W_step: float = 1.0
    E_F_min: float = 0.05
    E_F_max: float = 0.2
    E_F_step: float = 0.005

    def __post_init__(self):
        if not (self.W_step > 0 and self.E_F_step > 0):
            raise InputError("sweep steps must be > 0")
        if self.W_min > self.W_max or self.E_F_min > self.E_F_max:
            raise InputError("sweep ranges must be non-empty")
        if not (self.W_min > 0 and self.E_F_min > 0):
            raise InputError("sweep ranges must be positive")

    @staticmethod
    def _axis(lo, hi, step):
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + i * step, 12) for i in range(count)]

    @property
    def widths(self):
        return self._axis(self.W_min, self.W_max, self.W_step)

    @property
    def fermi_energies(self):
        return self._axis(self.E_F_min, self.E_F_max, self.E_F_step)

    def points(self):
        """(W, E_F) pairs, W-major."""
        return [(w, e) for w in self.widths for e in self.fermi_energies]


def _evaluate_star(args):
    W, E_F, settings = args
    return evaluate_gate_point(W, E_F, settings)


def sweep_map(grid: SweepGrid, settings: GateSettings = GateSettings(), threads: int = 1) -> list:
    """Evaluate every grid point; rows come back in grid order for any ``threads``."""
    jobs = [(w, e, settings) for w, e in grid.points()]
    if threads <= 1:
        return [_evaluate_star(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_evaluate_star, jobs, chunksize=chunk))


def success_curve(point: GatePoint, settings: GateSettings, n_samples: int = 64):
    """P_succ(L) sampled over the length search range for an unmasked point."""
    Ls = np.linspace(L_SEARCH[0] * point.sigma, L_SEARCH[1] * point.sigma, n_samples)
    vals = [
        success_probability(
            point.F,
            point.gamma1,
            L / point.v_g,
            containment_probability(L, point.sigma, settings.delta_l, settings.literal_containment),
        )
        for L in Ls
    ]
    return Ls, np.array(vals)


def is_unimodal(values) -> bool:
    """At most one sign change of the discrete derivative."""
    d = np.sign(np.diff(np.asarray(values)))
    d = d[d != 0]
    return int(np.count_nonzero(d[1:] != d[:-1])) <= 1


@dataclass(frozen=True)
class QOptimum:
    Q: float
    P_succ: float | None
    W: float
    L: float
    L_over_sigma: float
    F: float
    mask: str = ""


def optimize_q_curve(
    Q_list,
    E_F: float = 0.1,
    settings: GateSettings = GateSettings(),
    W_range=(10.0, 40.0),
    W_step: float = 1.0,
    refine_iterations: int = 40,
):
    """Best P_succ over (W, L) for each Q at fixed E_F.

    W is scanned on a grid, then refined by golden section in the cells
    around the best grid point. Returns ``(rows, monotone)`` where
    ``monotone`` reports whether P_succ* is nondecreasing in Q.
    """
    Q_list = list(Q_list)
    if not Q_list:
        raise InputError("Q_list must be non-empty")
    widths = SweepGrid._axis(W_range[0], W_range[1], W_step)
    rows = []
    for Q in Q_list:
        s = replace(settings, Q=float(Q))
        pts = [evaluate_gate_point(w, E_F, s) for w in widths]
        ok = [p for p in pts if not p.masked]
        if not ok:
            rows.append(QOptimum(Q=float(Q), P_succ=None, W=math.nan, L=math.nan, L_over_sigma=math.nan, F=math.nan, mask="infeasible"))
            continue
        best = max(ok, key=lambda p: p.P_succ)
        lo = max(W_range[0], best.W - W_step)
        hi = min(W_range[1], best.W + W_step)

        def objective(w, s=s):
            q = evaluate_gate_point(w, E_F, s)
            return -1.0 if q.masked else q.P_succ

        if hi > lo:
            w_ref, val = golden_section_max(objective, lo, hi, refine_iterations)
            if val > best.P_succ:
                best = evaluate_gate_point(w_ref, E_F, s)
        rows.append(
            QOptimum(Q=float(Q), P_succ=best.P_succ, W=best.W, L=best.L, L_over_sigma=best.L / best.sigma, F=best.F)
        )
    vals = [r.P_succ for r in rows if r.P_succ is not None]
    monotone = all(b >= a for a, b in zip(vals, vals[1:]))
    if not monotone:
        warnings.warn("optimal P_succ is not monotone in Q", RuntimeWarning, stacklevel=2)
    return rows, monotone


def point_dict(p: GatePoint) -> dict:
    return asdict(p)
