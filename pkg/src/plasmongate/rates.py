"""Single- and two-plasmon absorption rates.

``gamma1`` values are returned as hbar*gamma1 in eV. The two-plasmon rate
per unit length ``gamma2`` is a velocity (nm/fs): it is the strength of the
contact loss term gamma2*delta(rho) felt by two colliding plasmons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .conductivity import Material, Sigma3Model, sigma1, sigma1_omega_derivative, sigma3_re
from .errors import DomainError, InvalidNormalizationError
from .dispersion import solve_omega
from .ribbon import RibbonModeSet, solve_modes


@dataclass(frozen=True)
class RateSet:
    gamma1_intrinsic: float  # eV
    gamma1_q: float  # eV
    gamma2: float  # nm/fs


def normalisation_factor(omega: float, m: Material, model: str = "lrpa") -> float:
    """Im{sigma - omega d(sigma)/d(omega)} in units of e^2/hbar.

    This is the energy-normalisation weight of a single plasmon on a
    dispersive sheet.
    """
    s = sigma1(omega, m, model)
    ds = sigma1_omega_derivative(omega, m, model)
    val = (s - omega * ds).imag
    if not val > 0:
        raise InvalidNormalizationError(f"plasmon normalisation {val:.3e} <= 0 at hbar*omega={omega}")
    return val


def gamma1_intrinsic(omega: float, m: Material, model: str = "lrpa") -> float:
    """hbar*gamma1 = 2 hbar*omega Re sigma / Im{sigma - omega d sigma/d omega}.

    For a pure Drude sheet this is exactly gamma_D (1 + gamma_D^2/omega^2).
    """
    s = sigma1(omega, m, model)
    return 2.0 * omega * s.real / normalisation_factor(omega, m, model)


def gamma1_from_q(omega_p: float, quality: float) -> float:
    """hbar*gamma1 = hbar*omega_p / Q."""
    if not quality > 0:
        raise DomainError("quality factor Q must be > 0")
    return omega_p / quality


def gamma2_from_integrals(omega_p: float, xi1: float, xi3: float, m: Material, s3: Sigma3Model) -> float:
    """Two-plasmon loss strength (nm/fs) from the mode integrals (nm)."""
    norm = normalisation_factor(omega_p, m)
    s3_val = sigma3_re(omega_p, s3, m)
    return omega_p**3 * s3_val * xi3 / (units.HBAR * norm * norm * xi1 * xi1)


def gamma2(modes: RibbonModeSet, n: int, omega_p: float, m: Material, s3: Sigma3Model) -> float:
    """Two-plasmon loss strength of mode ``n`` (1-based) at hbar*omega_p."""
    i = n - 1
    return gamma2_from_integrals(omega_p, float(modes.xi1[i]), float(modes.xi3[i]), m, s3)


def gamma1_table(omegas, m: Material):
    """Rows (hbar*omega, hbar*gamma1 Drude, hbar*gamma1 LRPA), all in eV."""
    return [(float(w), gamma1_intrinsic(w, m, "drude"), gamma1_intrinsic(w, m, "lrpa")) for w in omegas]


def normalised_gamma2(gamma2_value: float, k_p: float, m: Material) -> float:
    """Dimensionless gamma2 * hbar / (lambda_p * E_F) with lambda_p = 2 pi / k_p."""
    lambda_p = 2.0 * math.pi / abs(k_p)
    return gamma2_value * units.HBAR / (lambda_p * m.fermi_energy)


def gamma2_table(n: int, k_values, grid, m: Material, s3: Sigma3Model):
    """Rows (hbar*omega, k, gamma2, normalised gamma2) along mode ``n``."""
    rows = []
    for k in np.asarray(k_values, dtype=float):
        w = solve_omega(n, float(k), grid, m)
        modes = solve_modes(grid, float(k) * grid.width, n_max=n)
        g2 = gamma2(modes, n, w, m.lossless(), s3)
        rows.append((w, float(k), g2, normalised_gamma2(g2, float(k), m)))
    return rows
