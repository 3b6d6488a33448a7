from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plasmongate.errors import BracketError, ConvergenceError, DomainError, InputError, UnderflowWarning
from plasmongate.numerics import (
    EULER_GAMMA,
    Tolerance,
    bessel_k,
    eig_real_dense,
    erf,
    find_root_bisect,
    golden_section_max,
    struve_l,
)

mpmath.mp.dps = 30


def test_k0_at_one_matches_integral_representation():
    ref = mpmath.quad(lambda t: mpmath.exp(-mpmath.cosh(t)), [0, 2, 5, 10])  # integrand ~ exp(-11000) at t = 10
    assert bessel_k(0, 1.0) == pytest.approx(float(ref), rel=1e-13)
    assert bessel_k(0, 1.0) == pytest.approx(0.42102443824070834, rel=1e-14)


def test_k0_small_argument_log():
    x = 1e-6
    assert bessel_k(0, x) == pytest.approx(-math.log(x / 2) - EULER_GAMMA, rel=1e-6)


def test_k1_large_argument_asymptote():
    # the two-term series is off by its first dropped term, 15/(128 x^2) ~ 1.2e-3
    x = 10.0
    approx = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + 3 / (8 * x))
    assert bessel_k(1, x) == pytest.approx(approx, rel=1.5e-3)
    approx3 = math.sqrt(math.pi / (2 * x)) * math.exp(-x) * (1 + 3 / (8 * x) - 15 / (128 * x * x))
    assert bessel_k(1, x) == pytest.approx(approx3, rel=1e-4)


@pytest.mark.parametrize("order", [0, 1])
def test_bessel_k_against_mpmath_on_log_grid(order):
    xs = np.logspace(-8, math.log10(699.0), 300)
    ours = bessel_k(order, xs)
    ref = np.array([float(mpmath.besselk(order, x)) for x in xs])
    assert np.max(np.abs(ours / ref - 1)) < 1e-10


@pytest.mark.parametrize("order", [0, 1])
def test_bessel_k_positive_decreasing(order):
    xs = np.logspace(-6, 2.5, 100)
    k = bessel_k(order, xs)
    assert np.all(k > 0)
    assert np.all(np.diff(k) < 0)


def test_bessel_k_domain_and_underflow():
    with pytest.raises(DomainError):
        bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        bessel_k(0, -1.0)
    with pytest.raises(DomainError):
        bessel_k(2, 1.0)
    with pytest.warns(UnderflowWarning):
        assert bessel_k(1, 800.0) == 0.0


def test_bessel_k_scalar_and_array_shapes():
    assert isinstance(bessel_k(0, 3.0), float)
    out = bessel_k(1, np.array([[0.5, 3.0], [30.0, 1.0]]))
    assert out.shape == (2, 2)


def _struve_series(nu, x, terms=20):
    h = mpmath.mpf(x) / 2
    return float(sum(h ** (2 * m + nu + 1) / (mpmath.gamma(m + 1.5) * mpmath.gamma(m + nu + 1.5)) for m in range(terms)))


def test_struve_l0_series_oracle():
    assert struve_l(0, 1.0) == pytest.approx(_struve_series(0, 1.0), rel=1e-14)


def test_struve_lm1_small_argument():
    x = 1e-3
    assert struve_l(-1, x) == pytest.approx(_struve_series(-1, x, terms=3), rel=1e-9)


def test_struve_l0_below_i0():
    i0 = float(mpmath.besseli(0, 5.0))
    assert struve_l(0, 5.0) < i0


@pytest.mark.parametrize("order", [-1, 0])
def test_struve_against_mpmath(order):
    xs = np.logspace(-8, math.log10(50.0), 200)
    ours = struve_l(order, xs)
    ref = np.array([float(mpmath.struvel(order, x)) for x in xs])
    assert np.max(np.abs(ours / ref - 1)) < 1e-9


def test_struve_domain():
    with pytest.raises(DomainError):
        struve_l(0, 0.0)
    with pytest.raises(DomainError):
        struve_l(1, 1.0)
    with pytest.raises(DomainError):
        struve_l(0, 701.0)


def test_erf_values():
    assert erf(0.0) == 0.0
    assert erf(-0.7) == -erf(0.7)
    assert erf(1.0) == pytest.approx(0.8427007929497149, abs=1e-15)
    arr = erf(np.linspace(-3, 3, 61))
    assert np.all(np.diff(arr) > 0)


@given(st.floats(min_value=-6, max_value=6, allow_nan=False))
def test_erf_odd(x):
    assert abs(erf(x) + erf(-x)) <= 1e-14


def test_bisect_linear_and_cos():
    assert find_root_bisect(lambda x: x - 2.0, 0.0, 5.0) == pytest.approx(2.0, abs=1e-12)
    assert find_root_bisect(math.cos, 1.0, 2.0) == pytest.approx(math.pi / 2, rel=1e-14)


def test_bisect_bracket_and_convergence_errors():
    with pytest.raises(BracketError):
        find_root_bisect(lambda x: x * x + 1, -1.0, 1.0)
    with pytest.raises(ConvergenceError):
        find_root_bisect(lambda x: x - 1 / 3, 0.0, 1.0, Tolerance(abs_tol=0.0, rel_tol=1e-300, max_iter=5))


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=-10, max_value=10), st.floats(min_value=0.1, max_value=5))
def test_bisect_stays_in_bracket(root, half):
    a, b = root - half, root + 0.5 * half
    seen = []

    def f(x):
        seen.append(x)
        return x - root

    x = find_root_bisect(f, a, b)
    assert all(a <= s <= b for s in seen)
    assert x == pytest.approx(root, abs=1e-11)


def test_tolerance_validation():
    with pytest.raises(InputError):
        Tolerance(abs_tol=0.0, rel_tol=0.0)
    with pytest.raises(InputError):
        Tolerance(max_iter=0)
    with pytest.raises(InputError):
        Tolerance(abs_tol=-1.0)


def test_golden_section_finds_parabola_peak():
    x, fx = golden_section_max(lambda x: -((x - 1.3) ** 2) + 2.0, 0.0, 4.0)
    assert x == pytest.approx(1.3, abs=1e-7)
    assert fx == pytest.approx(2.0, abs=1e-12)


def test_eig_identity_and_diagonal():
    pairs = eig_real_dense(np.eye(3), 3)
    assert [p[0] for p in pairs] == [1, 1, 1]
    pairs = eig_real_dense(np.diag([3.0, -1.0, 2.0]), 3, key=lambda lam: -lam.real)
    assert [p[0].real for p in pairs] == [3.0, 2.0, -1.0]
    for lam, vec in pairs:
        assert np.count_nonzero(np.abs(vec) > 1e-14) == 1
        assert vec[np.argmax(np.abs(vec))] == 1.0


def _jacobi_eigenvalues(A, sweeps=50):
    A = np.array(A, dtype=float)
    n = len(A)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < 1e-15:
            break
        for p in range(n):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-14 * (abs(A[p, p]) + abs(A[q, q]) + 1e-300):
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / A[p, q]
                t = np.sign(theta) / (abs(theta) + math.sqrt(theta * theta + 1)) if theta != 0 else 1.0
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q], J[q, p] = s, -s
                A = J.T @ A @ J
    return np.sort(np.diag(A))


def test_eig_symmetric_against_jacobi():
    rng = np.random.default_rng(7)
    B = rng.normal(size=(6, 6))
    A = B + B.T
    pairs = eig_real_dense(A, 6, key=lambda lam: lam.real)
    ours = np.array([p[0].real for p in pairs])
    assert np.allclose(ours, _jacobi_eigenvalues(A), atol=1e-8)
    for lam, vec in pairs:
        assert np.linalg.norm(A @ vec - lam * vec) <= 1e-8 * np.linalg.norm(A)
        assert abs(np.linalg.norm(vec) - 1) < 1e-12


def test_eig_rejects_bad_input():
    with pytest.raises(InputError):
        eig_real_dense(np.array([[1.0, np.nan], [0.0, 1.0]]), 1)
    with pytest.raises(InputError):
        eig_real_dense(np.eye(3), 4)
    with pytest.raises(InputError):
        eig_real_dense(np.ones((2, 3)), 1)


def test_eig_complex_pair_kept_complex():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    pairs = eig_real_dense(rot, 2, key=lambda lam: lam.imag)
    assert all(abs(p[0].imag) == pytest.approx(1.0) for p in pairs)
