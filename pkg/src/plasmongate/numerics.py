"""Special functions, root finding, 1-D maximisation and dense eigensolves.

The modified Bessel functions K0, K1 and the modified Struve functions
L_{-1}, L_0 are evaluated in-repo so that the ribbon matrices are
reproducible bit-for-bit across platforms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BracketError, ConvergenceError, DomainError, InputError, UnderflowWarning

EULER_GAMMA = 0.57721566490153286061

# K_nu switch points: power series below, exponentially convergent
# trapezoid rule in the middle, Hankel asymptotic series above.
_K_SERIES_MAX = 2.0
_K_ASYMPTOTIC_MIN = 25.0
_K_UNDERFLOW = 700.0


@dataclass(frozen=True)
class Tolerance:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-14
    max_iter: int = 200

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise InputError("tolerances must be non-negative")
        if self.abs_tol == 0 and self.rel_tol == 0:
            raise InputError("abs_tol and rel_tol cannot both be zero")
        if self.max_iter < 1:
            raise InputError("max_iter must be >= 1")


def _as_positive_array(x, name="x"):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0")
    return arr


def _k_series(order, x):
    y = 0.25 * x * x
    term = np.ones_like(x)  # y^k / (k! (k+order)!)
    psi_k = -EULER_GAMMA  # digamma(k+1)
    i_sum = np.zeros_like(x)
    d_sum = np.zeros_like(x)
    for k in range(40):
        if order == 0:
            i_sum += term
            d_sum += psi_k * term
        else:
            psi_k1 = psi_k + 1.0 / (k + 1)
            i_sum += term
            d_sum += (psi_k + psi_k1) * term
        psi_k += 1.0 / (k + 1)
        term = term * y / ((k + 1) * (k + 1 + order))
    log_half = np.log(0.5 * x)
    if order == 0:
        return -log_half * i_sum + d_sum
    i1 = 0.5 * x * i_sum
    return 1.0 / x + log_half * i1 - 0.25 * x * d_sum


def _k_trapezoid(order, x):
    # K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt; trapezoid converges
    # geometrically for this entire integrand.
    out = np.empty_like(x)
    for i, xi in enumerate(x):
        h = min(0.25, 0.5 / math.sqrt(xi))
        t_max = math.acosh(1.0 + 60.0 / xi)
        t = np.arange(0.0, t_max + h, h)
        f = np.exp(-xi * (np.cosh(t) - 1.0))
        if order == 1:
            f = f * np.cosh(t)
        out[i] = h * (0.5 * f[0] + f[1:].sum()) * math.exp(-xi)
    return out


def _k_asymptotic(order, x):
    mu = 4.0 * order * order
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        total += term
        if np.all(np.abs(term) < 1e-17 * np.abs(total)):
            break
    return np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) * total


def bessel_k(order, x):
    """Modified Bessel function of the second kind, K0 or K1.

    Accepts scalars or arrays; ``x`` must be positive. Arguments above 700
    underflow to 0 and raise an ``UnderflowWarning``.
    """
    if order not in (0, 1):
        raise DomainError("only orders 0 and 1 are supported")
    arr = _as_positive_array(x)
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros_like(flat)
    small = flat <= _K_SERIES_MAX
    mid = (flat > _K_SERIES_MAX) & (flat < _K_ASYMPTOTIC_MIN)
    large = (flat >= _K_ASYMPTOTIC_MIN) & (flat <= _K_UNDERFLOW)
    if small.any():
        out[small] = _k_series(order, flat[small])
    if mid.any():
        out[mid] = _k_trapezoid(order, flat[mid])
    if large.any():
        out[large] = _k_asymptotic(order, flat[large])
    if np.any(flat > _K_UNDERFLOW):
        warnings.warn(f"K_{order}(x) underflows for x > {_K_UNDERFLOW}", UnderflowWarning, stacklevel=2)
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def struve_l(order, x):
    """Modified Struve function L_{-1} or L_0 by direct power series.

    All series terms are positive, so the sum carries no cancellation error.
    """
    if order not in (-1, 0):
        raise DomainError("only orders -1 and 0 are supported")
    arr = _as_positive_array(x)
    flat = np.atleast_1d(arr).ravel()
    if np.any(flat > 700.0):
        raise DomainError("struve_l: x > 700 overflows double precision")
    half = 0.5 * flat
    nu = float(order)
    # (x/2)^(nu+1) / (Gamma(3/2) Gamma(nu + 3/2))
    term = half ** (nu + 1.0) / (math.gamma(1.5) * math.gamma(nu + 1.5))
    total = term.copy()
    q = half * half
    for m in range(5000):
        term = term * q / ((m + 1.5) * (m + nu + 1.5))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    else:  # pragma: no cover - only reachable near the overflow guard
        raise ConvergenceError("struve_l series did not converge")
    out = total.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def erf(x):
    """Error function (stdlib ``math.erf``); vectorised over arrays."""
    if np.ndim(x) == 0:
        return math.erf(float(x))
    return np.vectorize(math.erf, otypes=[float])(x)


def find_root_bisect(f: Callable[[float], float], a: float, b: float, tol: Tolerance = Tolerance()) -> float:
    """Bisection root of ``f`` on ``[a, b]``.

    Stops when ``|f(x)| <= tol.abs_tol`` or when the bracket width drops
    below ``tol.rel_tol * |x|``.
    """
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0:
        raise BracketError(f"no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")
    lo, hi, flo = a, b, fa
    for _ in range(tol.max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0 or abs(fm) <= tol.abs_tol:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        nxt = 0.5 * (lo + hi)
        if abs(hi - lo) <= tol.rel_tol * abs(nxt) or nxt in (lo, hi):
            return nxt
    raise ConvergenceError(f"bisection did not converge in {tol.max_iter} iterations")


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(f: Callable[[float], float], a: float, b: float, n_iter: int = 80):
    """Maximise a unimodal ``f`` on ``[a, b]`` with a fixed iteration count.

    Returns ``(x_best, f_best)``. The fixed count keeps results bit-identical
    between runs.
    """
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(n_iter):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    candidates = [(fc, c), (fd, d), (f(a), a), (f(b), b)]
    fbest, xbest = max(candidates, key=lambda p: p[0])
    return xbest, fbest


def _sign_normalise(v):
    v = v / np.linalg.norm(v)
    mags = np.abs(v)
    idx = int(np.argmax(mags > 1e-6 * mags.max()))
    ref = v[idx]
    phase = ref / abs(ref)
    return v / phase


def eig_real_dense(A, n_want: int, key: Callable[[complex], float] | None = None):
    """Eigenpairs of a dense real matrix.

    Pairs are sorted by ``key`` (default: descending ``|Re(1/lambda)|``) and
    the first ``n_want`` are returned as ``(eigenvalue, eigenvector)``.
    Eigenvectors have unit Euclidean norm and their first significant
    component positive; vectors of real eigenvalues are returned real.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError("A must be square")
    n = A.shape[0]
    if not 1 <= n_want <= n:
        raise InputError(f"n_want must lie in [1, {n}]")
    if not np.all(np.isfinite(A)):
        raise InputError("A has non-finite entries")
    try:
        w, v = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    if key is None:
        def key(lam):
            return -abs((1.0 / lam).real) if lam != 0 else -np.inf
    order = sorted(range(n), key=lambda i: key(complex(w[i])))[:n_want]
    norm_a = np.linalg.norm(A)
    pairs = []
    for i in order:
        lam = complex(w[i])
        vec = _sign_normalise(v[:, i])
        if abs(lam.imag) <= 1e-12 * max(abs(lam), 1e-300):
            vec = vec.real.copy()
            vec /= np.linalg.norm(vec)
            lam_out = complex(lam.real, 0.0)
        else:
            lam_out = lam
        resid = np.linalg.norm(A @ vec - lam_out * vec)
        if resid > 1e-8 * norm_a:
            raise ConvergenceError(f"eigenpair residual {resid:.3e} exceeds 1e-8 ||A||")
        pairs.append((lam_out, vec))
    return pairs
