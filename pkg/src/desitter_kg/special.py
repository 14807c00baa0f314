"""Gamma, digamma and the Gauss hypergeometric function on [0, 1).

The hypergeometric routines are vectorised over ``z`` for fixed parameters,
accept complex ``a`` and ``b`` (the large-mass kernels need ``a = b = 1/2 + i mu``),
and can be handed ``1 - z`` computed independently, which matters when ``z``
sits within a few ulps of 1.

Strategy:

* ``z <= 1/2``: direct Gauss series.
* ``z > 1/2``: the ``z -> 1 - z`` connection formula; when ``c - a - b`` is an
  integer the logarithmic form is used, and when it is merely close to one the
  value is obtained by Chebyshev interpolation in ``c - a - b`` over generic
  evaluations, which sidesteps the cancellation between the two connection
  terms.
* ``a`` or ``b`` a non-positive integer: the series terminates and is summed
  exactly for every ``z``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "HypParams",
    "HypResult",
    "gamma",
    "rgamma",
    "digamma",
    "hyp2f1",
    "hyp2f1_vec",
    "hyp2f1_reduced_vec",
    "hyp2f1_at_one",
    "one_minus_z_limit_check",
]

EPS = np.finfo(float).eps
SERIES_RTOL = 1e-16
SERIES_PATIENCE = 3
MAX_TERMS = 10_000

# near-integer band for c - a - b and the interpolation stencil used inside it
_NEAR_INT = 0.02
_INT_TOL = 1e-14
_CHEB_H = 0.05
_CHEB_N = 16
_CHEB_N_CHECK = 12

# Godfrey's coefficients, g = 607/128
_LANCZOS_G = 607.0 / 128.0
_LANCZOS = (
    0.99999999999999709182,
    57.156235665862923517,
    -59.597960355475491248,
    14.136097974741747174,
    -0.49191381609762019978,
    0.33994649984811888699e-4,
    0.46523628927048575665e-4,
    -0.98374475304879564677e-4,
    0.15808870322491248884e-3,
    -0.21026444172410488319e-3,
    0.21743961811521264320e-3,
    -0.16431810653676389022e-3,
    0.84418223983852743293e-4,
    -0.26190838401581408670e-4,
    0.36899182659531622704e-5,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)
_EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class HypParams:
    a: float
    b: float
    c: float
    z: float

    def __post_init__(self):
        if not 0.0 <= self.z <= 1.0:
            raise DomainError(f"z must lie in [0, 1], got {self.z!r}")


@dataclass(frozen=True)
class HypResult:
    value: float
    abs_err_est: float
    terms_used: int


def _is_nonpositive_int(x: complex) -> bool:
    x = complex(x)
    return x.imag == 0.0 and x.real <= 0.0 and x.real == math.floor(x.real)


def _cgamma(z: complex) -> complex:
    if _is_nonpositive_int(z):
        raise PoleError(f"gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * _cgamma(1.0 - z))
    z = z - 1.0
    acc = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        acc += _LANCZOS[k] / (z + k)
    t = z + _LANCZOS_G + 0.5
    # split the power so that t**(z+1/2) cannot overflow before exp(-t) tames it
    half = t ** (0.5 * (z + 0.5))
    return _SQRT_2PI * half * (cmath.exp(-t) * half) * acc


def gamma(x: float) -> float:
    """Gamma function of a real argument (Lanczos approximation).

    Raises :class:`PoleError` at non-positive integers.
    """
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"gamma has a pole at {x:g}")
    if x == math.floor(x) and 0 < x <= 23:
        return float(math.factorial(int(x) - 1))
    return _cgamma(complex(x)).real


def rgamma(z: complex) -> complex:
    """Reciprocal gamma function; zero at the poles of gamma."""
    if _is_nonpositive_int(z):
        return 0.0j
    return 1.0 / _cgamma(complex(z))


def digamma(z: complex) -> complex:
    """Digamma function for complex arguments away from the poles."""
    z = complex(z)
    if _is_nonpositive_int(z):
        raise PoleError(f"digamma has a pole at {z.real:g}")
    acc = 0.0j
    if z.real < 0.5 and abs(z.imag) < 10.0:
        # reflection keeps the upward recurrence short
        acc -= cmath.pi / cmath.tan(cmath.pi * z)
        z = 1.0 - z
    while abs(z) < 10.0:
        acc -= 1.0 / z
        z += 1.0
    iz2 = 1.0 / (z * z)
    # Bernoulli tail B_2k / (2k z^2k), k = 1..7
    tail = iz2 * (1 / 12 - iz2 * (1 / 120 - iz2 * (1 / 252 - iz2 * (
        1 / 240 - iz2 * (1 / 132 - iz2 * (691 / 32760 - iz2 / 12))))))
    return acc + cmath.log(z) - 0.5 / z - tail


def _series(a: complex, b: complex, c: complex, z: np.ndarray, start: int = 0):
    """Sum over k >= start of (a)_k (b)_k / ((c)_k k!) z**(k - start).

    Returns (sum, abs_err_est, terms).
    """
    if _is_nonpositive_int(c):
        raise DomainError(f"c = {c!r} is a non-positive integer")
    coef = 1.0 + 0.0j
    for k in range(start):
        coef *= (a + k) * (b + k) / ((c + k) * (k + 1))
    term = np.full(z.shape, coef, dtype=complex)
    total = term.copy()
    abs_total = np.abs(term)
    quiet = np.zeros(z.shape, dtype=int)
    k = start
    terms = 1
    tail = None
    while True:
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1))
        if ratio == 0:
            tail = 0.0
            break
        term = term * (ratio * z)
        total += term
        abs_term = np.abs(term)
        abs_total += abs_term
        k += 1
        terms += 1
        small = abs_term <= SERIES_RTOL * np.abs(total)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= SERIES_PATIENCE):
            break
        if terms >= MAX_TERMS:
            raise ConvergenceError(
                f"2F1 series with a={a}, b={b}, c={c} unconverged after {MAX_TERMS} terms"
            )
    err = 4.0 * EPS * abs_total + (np.abs(term) if tail is None else tail)
    return total, err, terms


def _log_case(a: complex, b: complex, m: int, w: np.ndarray):
    """F(a, b; a+b+m; 1-w) for integer m >= 0 (logarithmic connection formula)."""
    c = a + b + m
    total = np.zeros(w.shape, dtype=complex)
    err = np.zeros(w.shape)
    terms = 0
    g_c = _cgamma(c) if not _is_nonpositive_int(c) else None
    if g_c is None:
        raise DomainError(f"c = {c!r} is a non-positive integer")
    if m > 0:
        pref1 = math.factorial(m - 1) * g_c * rgamma(a + m) * rgamma(b + m)
        coef = 1.0 + 0.0j
        part = np.zeros(w.shape, dtype=complex)
        wk = np.ones(w.shape)
        for k in range(m):
            part += coef * wk
            terms += 1
            if k + 1 < m:
                coef *= (a + k) * (b + k) / ((k + 1) * (1 - m + k))
                wk = wk * w
        total += pref1 * part
        err += 4.0 * EPS * np.abs(pref1 * part)
    pref2 = -((-1) ** m) * g_c * rgamma(a) * rgamma(b)
    if pref2 == 0:
        return total, err, terms
    logw = np.log(w)
    psi_k1 = -_EULER_GAMMA                       # psi(k + 1)
    psi_km1 = -_EULER_GAMMA + sum(1.0 / j for j in range(1, m + 1))  # psi(k + m + 1)
    psi_a = digamma(a + m)
    psi_b = digamma(b + m)
    coef = 1.0 / math.factorial(m) + 0.0j        # (a+m)_k (b+m)_k / (k! (k+m)!)
    wk = w ** m
    acc = np.zeros(w.shape, dtype=complex)
    abs_acc = np.zeros(w.shape)
    quiet = np.zeros(w.shape, dtype=int)
    k = 0
    while True:
        term = coef * wk * (logw - psi_k1 - psi_km1 + psi_a + psi_b)
        acc += term
        abs_term = np.abs(term)
        abs_acc += abs_term
        terms += 1
        small = abs_term <= SERIES_RTOL * np.abs(acc)
        quiet = np.where(small, quiet + 1, 0)
        if np.all(quiet >= SERIES_PATIENCE) or np.all(wk == 0):
            break
        if terms >= MAX_TERMS:
            raise ConvergenceError("logarithmic 2F1 series unconverged")
        coef *= (a + m + k) * (b + m + k) / ((k + 1) * (k + m + 1))
        psi_k1 += 1.0 / (k + 1)
        psi_km1 += 1.0 / (k + m + 1)
        psi_a += 1.0 / (a + m + k)
        psi_b += 1.0 / (b + m + k)
        wk = wk * w
        k += 1
    total += pref2 * acc
    err += np.abs(pref2) * (8.0 * EPS * abs_acc + abs_term)
    return total, err, terms


def _generic(a: complex, b: complex, c: complex, w: np.ndarray):
    """Connection formula z -> 1 - z for non-integer c - a - b."""
    d = c - a - b
    g_c = _cgamma(c)
    amp1 = g_c * _cgamma(d) * rgamma(c - a) * rgamma(c - b)
    amp2 = g_c * _cgamma(-d) * rgamma(a) * rgamma(b)
    s1, e1, n1 = _series(a, b, 1.0 - d, w)
    t1 = amp1 * s1
    total, err, terms = t1, abs(amp1) * e1, n1
    if amp2 != 0:
        wd = np.exp(d * np.log(w))
        s2, e2, n2 = _series(c - a, c - b, 1.0 + d, w)
        t2 = amp2 * wd * s2
        total = t1 + t2
        err = err + np.abs(amp2 * wd) * e2 + 4.0 * EPS * (np.abs(t1) + np.abs(t2))
        terms = max(n1, n2)
    return total, err, terms


def _cheb_interp(a, b, c, w, m, offset, n_nodes):
    j = np.arange(n_nodes)
    theta = (2 * j + 1) * np.pi / (2 * n_nodes)
    nodes = _CHEB_H * np.cos(theta)
    weights = (-1.0) ** j * np.sin(theta)
    num = np.zeros(w.shape, dtype=complex)
    den = 0.0j
    err = np.zeros(w.shape)
    terms = 0
    for s, wt in zip(nodes, weights):
        val, e, n = _generic(c - b - m - s, b, c, w)
        coeff = wt / (offset - s)
        num += coeff * val
        den += coeff
        err = np.maximum(err, e)
        terms = max(terms, n)
    return num / den, err, terms


def _near_integer(a, b, c, w, m, offset):
    fine, err, terms = _cheb_interp(a, b, c, w, m, offset, _CHEB_N)
    coarse, _, _ = _cheb_interp(a, b, c, w, m, offset, _CHEB_N_CHECK)
    # Lebesgue constant of 16 Chebyshev nodes is below 3
    return fine, 3.0 * err + np.abs(fine - coarse), terms


def _upper(a: complex, b: complex, c: complex, z: np.ndarray, w: np.ndarray):
    d = c - a - b
    m = int(round(d.real))
    offset = d - m
    if abs(offset) < _INT_TOL:
        if m >= 0:
            return _log_case(a, b, m, w)
        # Euler: F(a,b;c;z) = w^(c-a-b) F(c-a, c-b; c; z), whose c'-a'-b' = -m > 0
        val, err, terms = _dispatch(c - a, c - b, c, z, w)
        scale = w ** float(m)
        return scale * val, scale * err, terms
    if abs(offset) < _NEAR_INT:
        return _near_integer(a, b, c, w, m, offset)
    return _generic(a, b, c, w)


def _dispatch(a: complex, b: complex, c: complex, z: np.ndarray, w: np.ndarray):
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        return _series(a, b, c, z)
    val = np.empty(z.shape, dtype=complex)
    err = np.empty(z.shape)
    terms = 0
    lo = z <= 0.5
    if np.any(lo):
        v, e, n = _series(a, b, c, z[lo])
        val[lo], err[lo], terms = v, e, n
    hi = ~lo
    if np.any(hi):
        v, e, n = _upper(a, b, c, z[hi], w[hi])
        val[hi], err[hi], terms = v, e, max(terms, n)
    return val, err, terms


def _prepare(z, one_minus_z):
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if one_minus_z is None:
        w = 1.0 - z
    else:
        w = np.broadcast_to(np.asarray(one_minus_z, dtype=float), z.shape).copy()
    if np.any(z < 0) or np.any(w <= 0) or np.any(~np.isfinite(z)):
        raise DomainError("2F1 evaluation requires z in [0, 1)")
    return z, w


def hyp2f1_vec(a, b, c, z, one_minus_z=None, *, with_error: bool = False):
    """Vectorised 2F1(a, b; c; z) for z in [0, 1).

    ``one_minus_z`` may be supplied when it is known more accurately than
    ``1 - z``.  Returns a complex array (and the error estimate when asked).
    """
    zz, w = _prepare(z, one_minus_z)
    val, err, _ = _dispatch(complex(a), complex(b), complex(c), zz, w)
    shape = np.shape(z)
    if with_error:
        return val.reshape(shape), err.reshape(shape)
    return val.reshape(shape)


def hyp2f1_reduced_vec(a, b, c, z, one_minus_z=None):
    """(2F1(a, b; c; z) - 1) / z, without cancellation near z = 0."""
    zz, w = _prepare(z, one_minus_z)
    a, b, c = complex(a), complex(b), complex(c)
    out = np.empty(zz.shape, dtype=complex)
    if _is_nonpositive_int(a) or _is_nonpositive_int(b):
        lo = np.ones(zz.shape, dtype=bool)
    else:
        lo = zz <= 0.5
    if np.any(lo):
        out[lo] = _series(a, b, c, zz[lo], start=1)[0]
    hi = ~lo
    if np.any(hi):
        full = _upper(a, b, c, zz[hi], w[hi])[0]
        out[hi] = (full - 1.0) / zz[hi]
    return out.reshape(np.shape(z))


def hyp2f1(p: HypParams) -> HypResult:
    """Real 2F1(a, b; c; z) for z in [0, 1) with an absolute error estimate.

    Raises :class:`ConvergenceError` when the estimate exceeds
    ``max(1e-12, 1e-12 * |value|)``.
    """
    if p.z >= 1.0:
        raise DomainError("hyp2f1 needs z < 1; use hyp2f1_at_one for z = 1")
    zz, w = _prepare(p.z, None)
    val, err, terms = _dispatch(complex(p.a), complex(p.b), complex(p.c), zz, w)
    value = float(val[0].real)
    est = float(err[0] + abs(val[0].imag))
    if not math.isfinite(value) or est > max(1e-12, 1e-12 * abs(value)):
        raise ConvergenceError(
            f"2F1({p.a}, {p.b}; {p.c}; {p.z}) error estimate {est:.3g} above target"
        )
    return HypResult(value=value, abs_err_est=est, terms_used=int(terms))


def hyp2f1_at_one(a: float, b: float, c: float) -> float:
    """Gauss's value F(a, b; c; 1) = G(c) G(c-a-b) / (G(c-a) G(c-b)), for c - a - b > 0."""
    if c - a - b <= 0:
        raise DomainError(f"F(a,b;c;1) diverges for c - a - b = {c - a - b:g} <= 0")
    val = _cgamma(complex(c)) * _cgamma(complex(c - a - b)) \
        * rgamma(c - a) * rgamma(c - b)
    return float(val.real)


def one_minus_z_limit_check(z: float) -> float:
    """(1 - z) * F(3/2, 3/2; 2; z), which tends to 4/pi as z -> 1-."""
    if not 0.9 < z < 1.0:
        raise DomainError("one_minus_z_limit_check expects z in (0.9, 1)")
    return (1.0 - z) * hyp2f1(HypParams(1.5, 1.5, 2.0, z)).value
