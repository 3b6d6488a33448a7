from __future__ import annotations

import math

import pytest

from plasmongate.conductivity import Material
from plasmongate.ribbon import RibbonGrid


@pytest.fixture
def graphene():
    return Material(0.1)


@pytest.fixture
def ribbon20():
    return RibbonGrid(20.0)


def params_at_ratio(ratio: float, v_bar: float = -0.00097, k: float = 0.05, mass: float = 3.0):
    """ScatterParams close to the n = 3 operating point with lambda_p/lambda_a = ratio."""
    from plasmongate import units
    from plasmongate.scattering import ScatterParams

    a = 4.0 * v_bar + 2.0 * units.HBAR * k / mass
    lambda_p = 2.0 * math.pi / k
    gamma2 = a * ratio / (k * lambda_p)
    return ScatterParams(k_p=k, v_g=v_bar + units.HBAR * k / mass, v_bar=v_bar, mass=mass, gamma2=gamma2)
