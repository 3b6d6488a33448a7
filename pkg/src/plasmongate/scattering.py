"""Two-plasmon collisions: absorption length, S-matrix and gate fidelity.

In the relative coordinate rho = x1 - x2 two counter-propagating plasmons
feel a contact loss -i gamma2 delta(rho). A relative plane wave k is
reflected with amplitude

    r(k) = -1 / (1 + (4 v_bar + 2 hbar k / m) / gamma2),   t = 1 + r.

``wavepacket_oracle`` integrates the relative-coordinate wave equation
directly and serves as an independent check of these amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp_sparse
from scipy.integrate import quad
from scipy.sparse.linalg import splu

from . import units
from .dispersion import LocalExpansion
from .errors import ConvergenceError, InputError, ResolutionError

PULSE_HALF_WIDTH = 6.0  # support is k0 +- 6/sigma
QUAD_TOL = 1e-8


@dataclass(frozen=True)
class ScatterParams:
    k_p: float  # nm^-1
    v_g: float  # nm/fs
    v_bar: float  # nm/fs
    mass: float  # eV fs^2 / nm^2
    gamma2: float  # nm/fs

    def __post_init__(self):
        if self.k_p == 0:
            raise InputError("k_p must be non-zero")
        if not self.gamma2 >= 0:
            raise InputError("gamma2 must be >= 0")
        if self.mass == 0 or not math.isfinite(self.mass):
            raise InputError("mass must be finite and non-zero")

    @classmethod
    def from_expansion(cls, le: LocalExpansion, gamma2: float) -> "ScatterParams":
        return cls(k_p=le.k_p, v_g=le.v_g, v_bar=le.v_bar, mass=le.mass, gamma2=gamma2)

    @property
    def lambda_p(self) -> float:
        return 2.0 * math.pi / abs(self.k_p)

    @property
    def lambda_a(self) -> float:
        return absorption_length_from(self.v_g, self.mass, self.k_p, self.gamma2)


@dataclass(frozen=True)
class GaussianPulse:
    """Relative-momentum amplitude psi(k) = (sigma/sqrt(pi))^(1/2) exp(-(k-k0)^2 sigma^2 / 2)."""

    k0: float  # nm^-1
    sigma: float  # nm

    def __post_init__(self):
        if not self.sigma > 0:
            raise InputError("pulse sigma must be > 0")

    @classmethod
    def for_ribbon(cls, k0: float, width: float, delta_k: float = 0.9) -> "GaussianPulse":
        """Pulse with sigma = W / delta_k."""
        if not delta_k > 0:
            raise InputError("delta_k must be > 0")
        return cls(k0=k0, sigma=width / delta_k)

    @property
    def support(self):
        half = PULSE_HALF_WIDTH / self.sigma
        return self.k0 - half, self.k0 + half

    def amplitude(self, k):
        return np.sqrt(self.sigma / math.sqrt(math.pi)) * np.exp(-0.5 * ((k - self.k0) * self.sigma) ** 2)

    def density(self, k):
        return self.sigma / math.sqrt(math.pi) * np.exp(-(((k - self.k0) * self.sigma) ** 2))


def absorption_length_from(v_g: float, mass: float, k_p: float, gamma2: float) -> float:
    if gamma2 == 0:
        return math.inf
    if not gamma2 > 0:
        raise InputError("gamma2 must be >= 0")
    return 2.0 / gamma2 * (2.0 * v_g / abs(k_p) - units.HBAR / mass)


def absorption_length(le: LocalExpansion, gamma2: float) -> float:
    """lambda_a = (2/gamma2)(2 v_g/|k_p| - hbar/m) in nm; inf when gamma2 = 0."""
    return absorption_length_from(le.v_g, le.mass, le.k_p, gamma2)


def absorption_length_relative(v_bar: float, mass: float, k_p: float, gamma2: float) -> float:
    """Equivalent form 4 v_bar/(k_p gamma2) + 2 hbar/(m gamma2)."""
    if gamma2 == 0:
        return math.inf
    return 4.0 * v_bar / (k_p * gamma2) + 2.0 * units.HBAR / (mass * gamma2)


def interaction_velocity(k, sp: ScatterParams):
    """4 v_bar + 2 hbar k / m; positive on the admissible range."""
    return 4.0 * sp.v_bar + 2.0 * units.HBAR * np.asarray(k, dtype=float) / sp.mass


def admissible(k, sp: ScatterParams):
    return interaction_velocity(k, sp) > 0


def r_coeff(k, sp: ScatterParams):
    """Reflection amplitude at relative wavevector ``k``.

    Non-admissible components are treated as perfectly reflected (r = -1);
    use ``admissible`` to flag them.
    """
    k_arr = np.asarray(k, dtype=float)
    if sp.gamma2 == 0:
        out = np.zeros_like(k_arr)
    else:
        a = interaction_velocity(k_arr, sp)
        with np.errstate(divide="ignore"):
            out = np.where(a > 0, -1.0 / (1.0 + np.where(a > 0, a, 0.0) / sp.gamma2), -1.0)
    return float(out) if np.ndim(k) == 0 else out


def t_coeff(k, sp: ScatterParams):
    """Transmission amplitude t = 1 + r."""
    r = r_coeff(k, sp)
    return 1.0 + r


def reflection_at_ratio(ratio: float) -> float:
    """r(k_p) = -1 / (1 + 2 pi lambda_a / lambda_p) given lambda_p / lambda_a."""
    if ratio == math.inf:
        return -1.0
    return -1.0 / (1.0 + 2.0 * math.pi / ratio)


def _kink(sp: ScatterParams):
    # zero of the interaction velocity, where r(k) is not smooth
    return -2.0 * sp.v_bar * sp.mass / units.HBAR


def _integrate(fn, pulse: GaussianPulse, sp: ScatterParams) -> float:
    lo, hi = pulse.support
    pts = [p for p in (_kink(sp), pulse.k0) if lo < p < hi]
    val, err = quad(fn, lo, hi, points=pts or None, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=400)
    if not err <= 10 * QUAD_TOL:
        raise ConvergenceError(f"pulse quadrature error estimate {err:.2e} above tolerance")
    return val


def fidelity(pulse: GaussianPulse, sp: ScatterParams) -> float:
    """F = |int dk r(k) |psi(k)|^2|^2 over k0 +- 6/sigma."""
    overlap = _integrate(lambda k: r_coeff(k, sp) * pulse.density(k), pulse, sp)
    return min(1.0, overlap * overlap)


def nonadmissible_weight(pulse: GaussianPulse, sp: ScatterParams) -> float:
    """Pulse probability carried by non-admissible relative wavevectors."""
    if sp.gamma2 == 0:
        return 0.0
    return _integrate(lambda k: pulse.density(k) * (not admissible(k, sp)), pulse, sp)


def fidelity_table(pulse: GaussianPulse, sp: ScatterParams, n_points: int = 201):
    """Rows (k, r, t, R, T, admissible) sampled across the pulse support."""
    ks = np.linspace(*pulse.support, n_points)
    r = r_coeff(ks, sp)
    ok = admissible(ks, sp)
    return [(float(k), float(a), float(1 + a), float(a * a), float((1 + a) ** 2), bool(o)) for k, a, o in zip(ks, r, ok)]


# -- wavepacket oracle ------------------------------------------------------


@dataclass(frozen=True)
class OracleSettings:
    regularization_fraction: float = 1.0 / 200.0  # delta width over lambda_p
    points_per_width: float = 2.0  # grid points per regularisation width
    start_offset: float = 5.0  # initial centre at -start_offset*sigma
    box_half_width: float = 10.0  # in units of sigma
    phase_step: float = 0.05  # max |omega - omega_0| dt over the pulse band
    max_points: int = 400_000
    max_steps: int = 200_000
    history_samples: int = 200


@dataclass
class OracleResult:
    reflection: float
    transmission: float
    reflected_phase: float
    final_norm: float
    dx: float
    dt: float
    n_steps: int
    history: list = field(default_factory=list)  # (t, norm, R(t), T(t))


def _hamiltonian(x, dx, sp: ScatterParams, width, shift, with_contact=True):
    n = len(x)
    c2 = units.HBAR / sp.mass
    main = np.full(n, 2.0 * c2 / dx**2 - shift, dtype=complex)
    off_lo = np.full(n - 1, -c2 / dx**2, dtype=complex)
    off_hi = off_lo.copy()
    # -2 i v_bar d/drho, central difference
    off_hi += -1j * sp.v_bar / dx
    off_lo += 1j * sp.v_bar / dx
    if sp.gamma2 > 0 and with_contact:
        delta = np.exp(-0.5 * (x / width) ** 2) / (math.sqrt(2.0 * math.pi) * width)
        main += -1j * sp.gamma2 * delta
    return sp_sparse.diags([off_lo, main, off_hi], [-1, 0, 1], format="csc")


def _propagate(psi, H, dt, n_steps, record=None, every=1):
    n = len(psi)
    eye = sp_sparse.identity(n, dtype=complex, format="csc")
    lu = splu((eye + 0.5j * dt * H).tocsc())
    B = (eye - 0.5j * dt * H).tocsr()
    for step in range(1, n_steps + 1):
        psi = lu.solve(B @ psi)
        if record is not None and (step % every == 0 or step == n_steps):
            record(step * dt, psi)
    return psi


def _lattice_omega(k, dx, sp: ScatterParams):
    c2 = units.HBAR / sp.mass
    return 2.0 * c2 / dx**2 * (1.0 - np.cos(k * dx)) + 2.0 * sp.v_bar * np.sin(k * dx) / dx


def wavepacket_oracle(
    sp: ScatterParams,
    pulse: GaussianPulse,
    regularization_width: float | None = None,
    settings: OracleSettings = OracleSettings(),
) -> OracleResult:
    """Scatter a Gaussian relative wavepacket off -i gamma2 delta_reg(rho).

    Solves i d/dt psi = [-(hbar/m) d^2 - 2 i v_bar d - i gamma2 delta_reg] psi
    on a uniform grid with Crank-Nicolson steps. ``delta_reg`` is a
    normalised Gaussian of width ``regularization_width`` (default
    lambda_p/200). The Hamiltonian is shifted by the carrier frequency, so
    the step size only has to resolve the pulse bandwidth; the shift is a
    global phase and drops out of every reported quantity.

    The reflected phase is measured against a hard-wall run (r = -1), so a
    perfect mirror gives pi.
    """
    if not sp.mass > 0:
        raise InputError("oracle needs a positive mass")
    k0, sigma = pulse.k0, pulse.sigma
    c2 = units.HBAR / sp.mass
    v_rel = 2.0 * c2 * k0 + 2.0 * sp.v_bar  # relative group velocity
    if not v_rel > 0:
        raise InputError("wavepacket does not move towards the collision point")
    w_reg = sp.lambda_p * settings.regularization_fraction if regularization_width is None else regularization_width
    if not 0 < w_reg <= 0.1 * sigma:
        raise ResolutionError("regularisation width must be positive and much smaller than the pulse width")
    half = settings.box_half_width * sigma
    n = 2 * int(math.ceil(half * settings.points_per_width / w_reg)) + 1
    if n > settings.max_points:
        raise ResolutionError(f"oracle grid needs {n} points (budget {settings.max_points})")
    x = np.linspace(-half, half, n)
    dx = x[1] - x[0]
    band = np.linspace(k0 - PULSE_HALF_WIDTH / sigma, k0 + PULSE_HALF_WIDTH / sigma, 257)
    reflected = -(band + 2.0 * sp.v_bar / c2)
    if max(np.abs(band).max(), np.abs(reflected).max()) * dx > 0.5:
        raise ResolutionError("grid does not resolve the pulse wavevectors")
    omega0 = float(_lattice_omega(k0, dx, sp))
    spread = float(np.abs(_lattice_omega(band, dx, sp) - omega0).max())
    t_total = 2.0 * settings.start_offset * sigma / v_rel
    n_steps = max(1, int(math.ceil(t_total * spread / settings.phase_step)))
    if n_steps > settings.max_steps:
        raise ResolutionError(f"oracle needs {n_steps} time steps (budget {settings.max_steps})")
    dt = t_total / n_steps

    x0 = -settings.start_offset * sigma
    psi0 = np.exp(-0.5 * ((x - x0) / sigma) ** 2 + 1j * k0 * x).astype(complex)
    psi0 /= math.sqrt(np.sum(np.abs(psi0) ** 2) * dx)

    cut = 10.0 * w_reg
    left, right = x < -cut, x > cut
    history = []

    def record(t, psi):
        p = np.abs(psi) ** 2 * dx
        history.append((t, float(p.sum()), float(p[left].sum()), float(p[right].sum())))

    record(0.0, psi0)
    every = max(1, n_steps // settings.history_samples)
    H = _hamiltonian(x, dx, sp, w_reg, omega0)
    psi = _propagate(psi0, H, dt, n_steps, record, every)
    prob = np.abs(psi) ** 2 * dx
    refl = float(prob[left].sum())
    trans = float(prob[right].sum())

    # hard-wall reference on the left half-line: reflected with r = -1
    neg = x < 0
    xw = x[neg]
    Hw = _hamiltonian(xw, dx, sp, w_reg, omega0, with_contact=False)
    psi_w = _propagate(psi0[neg], Hw, dt, n_steps)
    overlap = np.vdot(psi_w[xw < -cut], psi[left]) * dx
    phase = float(np.angle(-overlap) % (2.0 * math.pi)) if abs(overlap) > 0 else float("nan")
    return OracleResult(
        reflection=refl,
        transmission=trans,
        reflected_phase=phase,
        final_norm=float(prob.sum()),
        dx=float(dx),
        dt=float(dt),
        n_steps=n_steps,
        history=history,
    )


def oracle_reflection(k, sp: ScatterParams) -> float:
    """Plane-wave reflection of the oracle's own relative-coordinate equation.

    Matching across the contact term gives r = -1/(1 + (2 v_bar + 2 hbar k/m)/gamma2),
    with the reflected wave at -(k + 2 m v_bar / hbar).
    """
    if sp.gamma2 == 0:
        return 0.0
    a = 2.0 * sp.v_bar + 2.0 * units.HBAR * k / sp.mass
    return -1.0 / (1.0 + a / sp.gamma2)
