"""Flat wave-equation propagators.

``V_phi(x, t)`` solves ``w_tt = Laplacian w`` with ``w(0) = 0, w_t(0) = phi``
and ``v_phi = dV_phi/dt`` solves it with ``w(0) = phi, w_t(0) = 0``.

Radial profiles get closed forms wherever one exists:

* n = 1 through the odd antiderivative (d'Alembert),
* n = 3 about any point through the moment ``int s f(s) ds``,
* odd n >= 5 at the profile centre through the iterated operator
  ``(1/t d/dt)^((n-3)/2) [t^(n-2) f(t)]`` expanded into powers times derivatives.

Everything else (n = 2, or non-radial data for n <= 3) uses product
Gauss-Legendre quadrature refined until two successive levels agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError
from .profiles import FunctionProfile, RadialProfile

__all__ = [
    "WaveSample",
    "dalembert",
    "spherical_mean",
    "kirchhoff_v_V",
    "radial_origin_vV",
    "descent2d_v_V",
    "propagate",
    "V_time_derivatives",
    "origin_operator_terms",
    "support_breakpoints",
]

_ORIGIN_TOL = 1e-7
_QUAD_TOL = 1e-10
_MAX_LEVEL = 9


@dataclass
class WaveSample:
    x: np.ndarray
    t: float
    v: float
    V: float


# ---------------------------------------------------------------- helpers

@lru_cache(maxsize=64)
def _gl(npts: int):
    return np.polynomial.legendre.leggauss(npts)


def _as_point(x, n: int) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (n,):
        raise DomainError(f"expected a point in R^{n}, got shape {x.shape}")
    return x


def _center(profile, n: int) -> np.ndarray:
    c = getattr(profile, "center", None)
    return np.zeros(n) if c is None else _as_point(c, n)


def _radial_distance(profile, x, n: int) -> float:
    return float(np.linalg.norm(_as_point(x, n) - _center(profile, n)))


@lru_cache(maxsize=None)
def origin_operator_terms(n: int, extra: int = 0) -> tuple:
    """Expansion of ``d^extra/dt^extra (1/c0)(1/t d/dt)^((n-3)/2) [t^(n-2) f]``.

    Returned as a tuple of ``(coefficient, power, derivative order)`` so that the
    operator equals ``sum coef * t**power * f^(order)(t)``.
    """
    if n < 3 or n % 2 == 0:
        raise DomainError("origin formula needs odd n >= 3")
    c0 = math.prod(range(1, n - 1, 2))
    terms = {(n - 2, 0): 1.0 / c0}

    def d_dt(tm):
        out = {}
        for (p, j), c in tm.items():
            if p != 0:
                out[(p - 1, j)] = out.get((p - 1, j), 0.0) + c * p
            out[(p, j + 1)] = out.get((p, j + 1), 0.0) + c
        return {k: c for k, c in out.items() if c != 0.0}

    for _ in range((n - 3) // 2):
        terms = {(p - 1, j): c for (p, j), c in d_dt(terms).items()}
    for _ in range(extra):
        terms = d_dt(terms)
    return tuple(sorted((c, p, j) for (p, j), c in terms.items()))


def _eval_terms(terms, profile: RadialProfile, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros(t.shape)
    for c, p, j in terms:
        out = out + c * t ** p * profile.deriv(t, j)
    return out


# ------------------------------------------------------- analytic radial

def _radial_V_derivs(profile: RadialProfile, x, tau, n: int, kmax: int):
    """Rows k = 0..kmax of d^k V / dt^k at the times ``tau`` (radial data)."""
    tau = np.asarray(tau, dtype=float)
    out = np.zeros((kmax + 1,) + tau.shape)
    if n == 1:
        u = float(_as_point(x, 1)[0] - _center(profile, 1)[0])
        for k in range(kmax + 1):
            if k == 0:
                Fp, Fm = profile.antideriv(u + tau), profile.antideriv(u - tau)
            else:
                Fp, Fm = profile.deriv(u + tau, k - 1), profile.deriv(u - tau, k - 1)
            out[k] = 0.5 * (Fp - (-1) ** k * Fm)
        return out
    r0 = _radial_distance(profile, x, n)
    if n == 3 and r0 >= _ORIGIN_TOL:
        # V = (M(r0 + t) - M(r0 - t)) / (2 r0), with M even
        for k in range(kmax + 1):
            Mp = profile.moment_deriv(r0 + tau, k)
            Mm = profile.moment_deriv(r0 - tau, k)
            out[k] = (Mp - (-1) ** k * Mm) / (2.0 * r0)
        return out
    if n % 2 == 1 and n >= 3:
        if r0 >= _ORIGIN_TOL:
            raise DomainError(f"n={n} radial data supported only at the profile centre")
        for k in range(kmax + 1):
            out[k] = _eval_terms(origin_operator_terms(n, k), profile, tau)
        return out
    raise DomainError(f"no closed form for n={n}")


def _has_closed_form(profile, x, n: int) -> bool:
    if not isinstance(profile, RadialProfile):
        return False
    if n in (1, 3):
        return True
    return n % 2 == 1 and n >= 5


# --------------------------------------------------------- quadrature paths

def _refine(compute, level0: int = 4):
    """Double the resolution until two successive results agree to _QUAD_TOL."""
    prev = compute(level0)
    for lvl in range(level0 + 1, _MAX_LEVEL + 1):
        cur = compute(lvl)
        scale = max(1.0, max(float(np.max(np.abs(c))) for c in cur))
        if all(float(np.max(np.abs(a - b))) <= _QUAD_TOL * scale for a, b in zip(cur, prev)):
            return cur
        prev = cur
    raise ConvergenceError("quadrature did not stabilise at the finest level")


def _sphere_rule(level: int):
    """Product rule on S^2: Gauss-Legendre in cos(theta), trapezoid in azimuth."""
    nt = 2 ** level
    ct, w = _gl(nt)
    na = 2 * nt
    alpha = 2 * np.pi * np.arange(na) / na
    st = np.sqrt(1.0 - ct * ct)
    omega = np.stack(
        [np.outer(st, np.cos(alpha)), np.outer(st, np.sin(alpha)),
         np.repeat(ct[:, None], na, axis=1)], axis=-1
    ).reshape(-1, 3)
    weights = np.repeat(w[:, None] / (2.0 * na), na, axis=1).reshape(-1)
    return omega, weights  # weights sum to 1: a mean, not an integral


def _sphere_means(profile, x, tau, with_grad: bool):
    x = _as_point(x, 3)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))

    def compute(level):
        omega, w = _sphere_rule(level)
        pts = x[None, None, :] + tau[:, None, None] * omega[None, :, :]
        mean = profile.value(pts) @ w
        if not with_grad:
            return (mean,)
        g = np.sum(profile.gradient(pts) * omega[None, :, :], axis=-1) @ w
        return mean, g

    return _refine(compute)


def _line_integral(profile, x: float, tau):
    """``(1/2) int_{x - t}^{x + t} phi`` for a non-radial profile on the line."""
    tau = np.atleast_1d(np.asarray(tau, dtype=float))

    def compute(level):
        s, w = _gl(2 ** level)
        # map [-1, 1] onto [x - t, x + t] for each t
        pts = x + tau[:, None] * s[None, :]
        vals = profile.value(pts[..., None])
        return (0.5 * tau * (vals @ w),)

    return _refine(compute)[0]


def _disk_terms(profile, x, tau):
    """n = 2 descent: returns (V, v) via the substitution |y| = sin(theta)."""
    x = _as_point(x, 2)
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    radial = isinstance(profile, RadialProfile)
    r0 = _radial_distance(profile, x, 2) if radial else None

    if radial and r0 < _ORIGIN_TOL:
        R = profile.support_radius

        def compute(level):
            s, w = _gl(2 ** level)
            V = np.zeros(tau.shape)
            dV = np.zeros(tau.shape)
            for i, t in enumerate(tau):
                if t == 0.0:
                    continue
                edge = math.asin(min(R / t, 1.0))  # f(t sin theta) = 0 beyond
                th = 0.5 * edge * (s + 1.0)
                ww = 0.5 * edge * w
                st = np.sin(th)
                f0 = profile(t * st)
                f1 = profile.deriv(t * st, 1)
                I0 = np.sum(ww * f0 * st)
                V[i] = t * I0
                dV[i] = I0 + t * np.sum(ww * f1 * st * st)
            return V, dV

        return _refine(compute)

    def compute(level):
        nt = 2 ** level
        s, w = _gl(nt)
        th = 0.25 * np.pi * (s + 1.0)
        wt = 0.25 * np.pi * w
        na = 4 * nt
        alpha = 2 * np.pi * np.arange(na) / na
        e = np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)
        st = np.sin(th)
        disp = st[:, None, None] * e[None, :, :]  # (theta, alpha, 2)
        pts = x + tau[:, None, None, None] * disp[None]
        vals = profile.value(pts)
        grads = np.sum(profile.gradient(pts) * disp[None], axis=-1)
        wa = 1.0 / na
        I0 = np.einsum("kij,i->k", vals, wt * st) * wa
        I1 = np.einsum("kij,i->k", grads, wt * st) * wa
        return tau * I0, I0 + tau * I1

    return _refine(compute)


# ----------------------------------------------------------------- public

def propagate(profile, x, tau, n: int):
    """Return arrays ``(v, V)`` of the flat propagators at the times ``tau``.

    ``tau`` must be non-negative.  Zero profiles short-circuit to zeros.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    if np.any(tau < 0):
        raise DomainError("propagation times must be non-negative")
    if profile is None or getattr(profile, "is_zero", False):
        return np.zeros(tau.shape), np.zeros(tau.shape)
    if _has_closed_form(profile, x, n):
        d = _radial_V_derivs(profile, x, tau, n, 1)
        return d[1], d[0]
    if n == 1:
        xx = float(_as_point(x, 1)[0])
        V = _line_integral(profile, xx, tau)
        v = 0.5 * (profile.value((xx + tau)[:, None]) + profile.value((xx - tau)[:, None]))
        return v, V
    if n == 2:
        V, v = _disk_terms(profile, x, tau)
        return v, V
    if n == 3:
        mean, g = _sphere_means(profile, x, tau, with_grad=True)
        return mean + tau * g, tau * mean
    raise DomainError(f"general (non-radial) data are not supported for n={n}")


def V_time_derivatives(profile, x, t: float, n: int, kmax: int) -> np.ndarray:
    """``[d^k V/dt^k (x, t) for k = 0..kmax]``, analytic where a closed form exists."""
    if profile is None or getattr(profile, "is_zero", False):
        return np.zeros(kmax + 1)
    if _has_closed_form(profile, x, n):
        return _radial_V_derivs(profile, x, np.array([t]), n, kmax)[:, 0]
    raise DomainError("analytic time derivatives need radial data with a closed form")


def support_breakpoints(profile, x, n: int):
    """Radii where ``v(x, .)``/``V(x, .)`` may lose smoothness, and whether they vanish beyond.

    Returns ``(lo, hi, compact)``: for odd n the propagators vanish for
    ``t < lo`` and ``t > hi``; for even n they vanish for ``t < lo`` only.
    """
    if profile is None or getattr(profile, "is_zero", False):
        return 0.0, 0.0, True
    d = profile.distance_from_center(x)
    R = profile.support_radius
    return max(d - R, 0.0), d + R, n % 2 == 1


def dalembert(phi0, phi1, x, t):
    """n = 1: ``(v_phi0, V_phi1)`` at (x, t)."""
    if t < 0:
        raise DomainError("t must be non-negative")
    v, _ = propagate(phi0, [x], [t], 1)
    _, V = propagate(phi1, [x], [t], 1)
    return float(v[0]), float(V[0])


def spherical_mean(phi, x, rho: float, n: int = 3) -> float:
    """Average of ``phi`` over the sphere of radius ``rho`` about ``x`` in R^n (n <= 3)."""
    if rho < 0:
        raise DomainError("rho must be non-negative")
    x = _as_point(x, n)
    if rho == 0.0:
        return float(phi.value(x[None])[0])
    if isinstance(phi, RadialProfile) and _radial_distance(phi, x, n) < _ORIGIN_TOL:
        return float(phi(rho))
    if n == 1:
        return float(0.5 * (phi.value(np.array([[x[0] + rho]])) +
                            phi.value(np.array([[x[0] - rho]])))[0])
    if n == 2:
        def compute(level):
            na = 2 ** (level + 2)
            a = 2 * np.pi * np.arange(na) / na
            pts = x + rho * np.stack([np.cos(a), np.sin(a)], axis=-1)
            return (np.array([np.mean(phi.value(pts))]),)
        return float(_refine(compute)[0][0])
    if n == 3:
        return float(_sphere_means(phi, x, [rho], with_grad=False)[0][0])
    raise DomainError("spherical_mean supports n <= 3")


def kirchhoff_v_V(phi0, phi1, x, t: float, method: str = "auto"):
    """n = 3 Kirchhoff propagators ``(v_phi0, V_phi1)`` at (x, t).

    ``method='quadrature'`` forces the sphere quadrature even for radial data,
    which is how the closed form is cross-checked.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if method == "quadrature":
        def quad(p, want_v):
            if p is None or p.is_zero:
                return 0.0
            mean, g = _sphere_means(p, x, [t], with_grad=True)
            return float(mean[0] + t * g[0]) if want_v else float(t * mean[0])
        return quad(phi0, True), quad(phi1, False)
    v, _ = propagate(phi0, x, [t], 3)
    _, V = propagate(phi1, x, [t], 3)
    return float(v[0]), float(V[0])


def radial_origin_vV(n: int, phi: RadialProfile, t: float):
    """``(v_phi(0, t), V_phi(0, t))`` for odd n >= 3 and data radial about the origin."""
    if t <= 0:
        raise DomainError("t must be positive")
    if n < 3 or n % 2 == 0:
        raise DomainError("n must be odd and >= 3")
    tt = np.array([t])
    V = _eval_terms(origin_operator_terms(n, 0), phi, tt)[0]
    v = _eval_terms(origin_operator_terms(n, 1), phi, tt)[0]
    return float(v), float(V)


def descent2d_v_V(phi0, phi1, x, t: float):
    """n = 2 Poisson propagators ``(v_phi0, V_phi1)``, normalised so that V_1 = t."""
    if t < 0:
        raise DomainError("t must be non-negative")
    v, _ = propagate(phi0, x, [t], 2)
    _, V = propagate(phi1, x, [t], 2)
    return float(v[0]), float(V[0])
