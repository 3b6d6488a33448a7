from __future__ import annotations

import math
from collections import Counter

import numpy as np
import pytest

from plasmongate import units
from plasmongate.conductivity import Material, Sigma3Model, sigma1, sigma1_omega_derivative
from plasmongate.dispersion import solve_omega
from plasmongate.errors import DomainError, InvalidNormalizationError
from plasmongate.rates import (
    gamma1_from_q,
    gamma1_intrinsic,
    gamma1_table,
    gamma2,
    gamma2_from_integrals,
    gamma2_table,
    normalisation_factor,
    normalised_gamma2,
)
from plasmongate.ribbon import RibbonGrid, RibbonModeSet, mode_fields_and_integrals, solve_modes


@pytest.mark.parametrize("ratio", [0.01, 0.1, 0.5, 1.2])
def test_drude_absorption_identity(ratio):
    w = 0.08
    m = Material(0.1, drude_rate=ratio * w)
    g = ratio * w
    assert gamma1_intrinsic(w, m, "drude") == pytest.approx(g * (1 + ratio**2), rel=1e-10)


def test_drude_rate_close_to_scattering_rate():
    w = 0.1
    m = Material(0.1, drude_rate=w / 100)
    g1 = gamma1_intrinsic(w, m, "drude")
    assert abs(g1 / (w / 100) - 1) <= 1e-4 + 1e-12


def test_normalisation_forms_coincide():
    # 2 sigma - d(omega sigma)/d omega and sigma - omega d sigma/d omega are the same expression
    m = Material(0.1, drude_rate=0.001)
    for w in (0.05, 0.12, 0.16):
        s, ds = sigma1(w, m), sigma1_omega_derivative(w, m)
        a = (2 * s - (s + w * ds)).imag
        assert normalisation_factor(w, m) == pytest.approx(a, rel=1e-14)


def test_drude_normalisation_is_twice_im_sigma(graphene):
    assert normalisation_factor(0.07, graphene, "drude") == pytest.approx(2 * sigma1(0.07, graphene, "drude").imag)


def test_lossless_gives_zero_rate(graphene):
    for w in (0.05, 0.1, 0.15):
        assert gamma1_intrinsic(w, graphene) == 0.0


def test_invalid_normalisation_above_interband_edge(graphene):
    with pytest.raises(InvalidNormalizationError):
        normalisation_factor(0.25, graphene)


def test_lrpa_rate_on_drude_scale():
    m = Material(0.1, drude_rate=0.001)
    for w in np.linspace(0.05, 0.15, 11):
        r = gamma1_intrinsic(w, m) / 0.001
        assert 0.5 < r < 2.0


def test_gamma1_from_q():
    assert gamma1_from_q(0.15, 1000) == pytest.approx(1.5e-4)
    assert gamma1_from_q(0.15, 150) == pytest.approx(1.0e-3)
    assert gamma1_from_q(0.15, 1e30) < 1e-30
    with pytest.raises(DomainError):
        gamma1_from_q(0.15, 0.0)


def test_gamma1_table_columns(graphene):
    rows = gamma1_table([0.05, 0.1], Material(0.1, drude_rate=0.001))
    assert len(rows) == 2 and len(rows[0]) == 3


@pytest.fixture
def modes20(ribbon20):
    return solve_modes(ribbon20, 1.0)


def test_gamma2_linear_in_sigma3(modes20, graphene):
    a = gamma2(modes20, 2, 0.13, graphene, Sigma3Model.constant(1.0))
    b = gamma2(modes20, 2, 0.13, graphene, Sigma3Model.constant(2.0))
    assert b == 2 * a


def test_gamma2_invariant_under_rescale(modes20, ribbon20, graphene):
    scaled = RibbonModeSet(modes20.q, modes20.etas, 3.0 * modes20.potentials, modes20.node_counts)
    # continuum normalisation removes any prefactor; check the raw integrals too
    x1, x3 = mode_fields_and_integrals(scaled, ribbon20)
    assert np.allclose(x1, modes20.xi1) and np.allclose(x3, modes20.xi3)
    g = gamma2_from_integrals(0.13, 9 * modes20.xi1[1], 81 * modes20.xi3[1], graphene, Sigma3Model())
    assert g == pytest.approx(gamma2(modes20, 2, 0.13, graphene, Sigma3Model()), rel=1e-13)


def test_gamma2_positive_and_finite(modes20, graphene):
    for n, w in ((2, 0.1295), (3, 0.1493)):
        g = gamma2(modes20, n, w, graphene, Sigma3Model())
        assert 0 < g < math.inf


def test_gamma2_zero_below_tpa_threshold(modes20, graphene):
    # the two-photon plug-in vanishes for hbar*omega <= E_F
    assert gamma2(modes20, 2, 0.09, graphene, Sigma3Model()) == 0.0


class Q:
    """Minimal quantity with dimension exponents, for unit auditing."""

    def __init__(self, v, **dims):
        self.v, self.d = v, Counter(dims)

    def __mul__(self, o):
        if not isinstance(o, Q):
            return Q(self.v * o, **self.d)
        d = Counter(self.d)
        d.update(o.d)
        return Q(self.v * o.v, **d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        d = Counter(self.d)
        d.subtract(o.d)
        return Q(self.v / o.v, **d)

    def __pow__(self, p):
        return Q(self.v**p, **{k: e * p for k, e in self.d.items()})

    def dims(self):
        return {k: e for k, e in self.d.items() if e}


def test_gamma2_unit_audit(modes20, graphene):
    # rebuild gamma2 from dimensioned quantities: sigma1 = s1 e^2/hbar,
    # sigma3 = s3 e^4/hbar with s3 in nm^2/eV^2, omega as an angular frequency
    hbar = Q(units.HBAR, eV=1, fs=1)
    e2 = Q(units.E2, eV=1, nm=1)
    omega = Q(0.1295, eV=1) / hbar
    s3 = Q(units.HBAR**2 / 0.1295**4, nm=2, eV=-2) * e2 * e2 / hbar
    norm = Q(normalisation_factor(0.1295, graphene)) * e2 / hbar
    xi1 = Q(float(modes20.xi1[1]), nm=1)
    xi3 = Q(float(modes20.xi3[1]), nm=1)
    g = hbar * omega**3 * s3 * xi3 / (norm**2 * xi1**2)
    assert g.dims() == {"nm": 1, "fs": -1}
    assert g.v == pytest.approx(gamma2(modes20, 2, 0.1295, graphene, Sigma3Model()), rel=1e-12)


def test_gamma2_grid_independent(graphene):
    a = gamma2(solve_modes(RibbonGrid(20.0, 100), 1.0), 2, 0.1295, graphene, Sigma3Model())
    b = gamma2(solve_modes(RibbonGrid(20.0, 200), 1.0), 2, 0.1295, graphene, Sigma3Model())
    assert abs(a / b - 1) < 0.01


def test_gamma2_table(ribbon20, graphene):
    rows = gamma2_table(2, [0.05], ribbon20, graphene, Sigma3Model())
    w, k, g, gn = rows[0]
    assert w == pytest.approx(solve_omega(2, 0.05, ribbon20, graphene))
    assert gn == pytest.approx(normalised_gamma2(g, k, graphene))
    assert gn == pytest.approx(g * units.HBAR * 0.05 / (2 * math.pi * 0.1))
