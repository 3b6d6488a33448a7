"""Linear and third-order optical conductivity of extended graphene.

Frequencies are passed as photon energies hbar*omega in eV. Linear
conductivities are returned in units of e^2/hbar.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import units
from .errors import DomainError, InputError, RangeWarning, SingularityWarning
from .numerics import Tolerance, find_root_bisect


@dataclass(frozen=True)
class Material:
    """Doped graphene in a dielectric environment.

    ``eps_eff`` is the average of the permittivities above and below the
    sheet.
    """

    fermi_energy: float
    drude_rate: float = 0.0  # hbar * gamma_D, eV
    fermi_velocity: float = units.V_FERMI
    eps_eff: float = 1.0

    def __post_init__(self):
        if not self.fermi_energy > 0:
            raise InputError("fermi_energy must be > 0")
        if not 0 <= self.drude_rate < self.fermi_energy:
            raise InputError("drude_rate must satisfy 0 <= hbar*gamma_D < E_F")
        if not self.fermi_velocity > 0:
            raise InputError("fermi_velocity must be > 0")
        if not self.eps_eff >= 1:
            raise InputError("eps_eff must be >= 1")

    def lossless(self) -> "Material":
        return Material(self.fermi_energy, 0.0, self.fermi_velocity, self.eps_eff)


def _check_omega(omega):
    if not omega > 0:
        raise DomainError("hbar*omega must be > 0")


def sigma1_drude(omega: float, m: Material) -> complex:
    _check_omega(omega)
    return 1j / math.pi * m.fermi_energy / complex(omega, m.drude_rate)


def sigma1_interband(omega: float, m: Material) -> complex:
    _check_omega(omega)
    two_ef = 2.0 * m.fermi_energy
    if omega == two_ef:
        warnings.warn("interband conductivity is log-singular at hbar*omega = 2 E_F", SingularityWarning, stacklevel=2)
        return complex(0.25, -math.inf)
    step = 1.0 if omega > two_ef else 0.0
    return 0.25 * complex(step, math.log(abs((omega - two_ef) / (omega + two_ef))) / math.pi)


def sigma1_lrpa(omega: float, m: Material) -> complex:
    """Local-RPA conductivity: Drude term plus the T=0 interband term."""
    return sigma1_drude(omega, m) + sigma1_interband(omega, m)


def sigma1_omega_derivative(omega: float, m: Material, model: str = "lrpa") -> complex:
    """Analytic d(sigma)/d(hbar*omega), in e^2/hbar per eV."""
    _check_omega(omega)
    d = -1j / math.pi * m.fermi_energy / complex(omega, m.drude_rate) ** 2
    if model == "drude":
        return d
    two_ef = 2.0 * m.fermi_energy
    if abs(omega - two_ef) < 1e-6:
        warnings.warn("conductivity derivative is singular near hbar*omega = 2 E_F", SingularityWarning, stacklevel=2)
        return complex(0.0, -math.inf)
    return d + 0.25j / math.pi * (1.0 / (omega - two_ef) - 1.0 / (omega + two_ef))


def sigma1(omega: float, m: Material, model: str = "lrpa") -> complex:
    if model == "lrpa":
        return sigma1_lrpa(omega, m)
    if model == "drude":
        return sigma1_drude(omega, m)
    raise InputError(f"unknown conductivity model {model!r}")


def plasma_frequency(m: Material) -> float:
    """hbar*omega where Im sigma_LRPA changes sign (lossless), in eV."""
    lossless = m.lossless()
    ef = m.fermi_energy
    return find_root_bisect(
        lambda w: sigma1_lrpa(w, lossless).imag,
        ef,
        2.0 * ef * (1.0 - 1e-9),
        Tolerance(abs_tol=0.0, rel_tol=1e-15, max_iter=200),
    )


# -- third-order response ----------------------------------------------------

TPA_PROVENANCE = (
    "two-photon interband absorption of massless Dirac fermions from second-order "
    "golden-rule perturbation theory (spin x valley degeneracy 4, T = 0, clean limit): "
    "Re sigma3 = e^4 v_F^2 / (hbar^3 omega^4) * Theta(hbar omega - E_F), in the "
    "convention j_omega = sigma3 |E_omega|^2 E_omega with E(t) = E_omega e^{-i omega t} + c.c."
)


def sigma3_tpa(omega: float, m: Material) -> float:
    """Re sigma3 from two-plasmon interband absorption, reduced units.

    Returns (hbar v_F)^2 / (hbar omega)^4 for hbar*omega > E_F and zero below,
    i.e. Re sigma3 in units of e^4/hbar * nm^2/eV^2.
    """
    _check_omega(omega)
    if omega <= m.fermi_energy:
        return 0.0
    hv = units.HBAR * m.fermi_velocity
    return hv * hv / omega**4


@dataclass(frozen=True)
class Sigma3Model:
    """Re sigma3(omega) model: ``constant``, ``tabulated`` or ``analytic``."""

    kind: str = "analytic"
    value: float = 0.0
    table_omega: tuple = ()
    table_value: tuple = ()
    provenance: str = TPA_PROVENANCE
    source: str = field(default="", compare=False)

    def __post_init__(self):
        if self.kind not in ("constant", "tabulated", "analytic"):
            raise InputError(f"unknown sigma3 model kind {self.kind!r}")
        if self.kind == "tabulated":
            w = np.asarray(self.table_omega, dtype=float)
            if len(w) < 2 or len(w) != len(self.table_value):
                raise InputError("tabulated sigma3 needs >= 2 matching (omega, value) rows")
            if np.any(np.diff(w) <= 0):
                raise InputError("tabulated sigma3 omega column must be strictly increasing")

    @classmethod
    def constant(cls, value: float) -> "Sigma3Model":
        return cls(kind="constant", value=float(value), provenance=f"constant Re sigma3 = {value!r}")

    @classmethod
    def tabulated(cls, omegas, values, source: str = "") -> "Sigma3Model":
        return cls(
            kind="tabulated",
            table_omega=tuple(float(w) for w in omegas),
            table_value=tuple(float(v) for v in values),
            provenance=f"tabulated Re sigma3 ({len(omegas)} rows) {source}".strip(),
            source=source,
        )

    @classmethod
    def analytic(cls) -> "Sigma3Model":
        return cls()

    @classmethod
    def from_csv(cls, path) -> "Sigma3Model":
        """Load a two-column CSV (hbar*omega in eV, reduced Re sigma3).

        The first line is a header and is skipped.
        """
        path = Path(path)
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        if len(rows) < 3:
            raise InputError(f"{path}: need a header line and at least two data rows")
        omegas, values = [], []
        for lineno, row in enumerate(rows[1:], start=2):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                omegas.append(float(row[0]))
                values.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise InputError(f"{path}:{lineno}: expected two numeric columns") from exc
        return cls.tabulated(omegas, values, source=str(path))


def sigma3_re(omega: float, model: Sigma3Model, m: Material) -> float:
    """Re sigma3 at ``omega`` (eV) in units of e^4/hbar * nm^2/eV^2.

    Tabulated models interpolate linearly and clamp outside their range,
    emitting a ``RangeWarning``.
    """
    if model.kind == "constant":
        return model.value
    if model.kind == "tabulated":
        w = model.table_omega
        if omega < w[0] or omega > w[-1]:
            warnings.warn(
                f"hbar*omega={omega} outside tabulated sigma3 range [{w[0]}, {w[-1]}]; clamped",
                RangeWarning,
                stacklevel=2,
            )
        return float(np.interp(omega, w, model.table_value))
    return sigma3_tpa(omega, m)
