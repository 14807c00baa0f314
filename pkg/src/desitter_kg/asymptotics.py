"""Large-time expansion of the solution at the knot mass m = sqrt(n^2 - 1)/2.

With z = e^(-t) the solution is e^(-(n-1)t/2) [v0 + (n-1)/2 V0 + V1] at radius
1 - z, so Taylor coefficients of V(x, .) about t = 1,

    V^(k)(x) = (-1)^k / k! * d^k V / dt^k (x, 1),

give a polynomial in z whose truncation error is O(z^(N + (n-1)/2)).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .desitter import CauchyProblem, solve_many
from .errors import ConvergenceError, DomainError
from .wave import V_time_derivatives, _as_point, _has_closed_form, propagate

__all__ = [
    "ExpansionCoeffs",
    "DecayFit",
    "expansion_coeffs",
    "asympt_eval",
    "decay_fit",
    "remainder_V",
    "fit_to_csv",
]

_RICHARDSON_TOL = 1e-8
_FLOOR_FACTOR = 64.0


@dataclass
class ExpansionCoeffs:
    N: int
    x: np.ndarray
    n: int
    Vk0: list  # V_phi0^(k), k = 0..N
    vk0: list  # v_phi0^(k), k = 0..N-1
    Vk1: list  # V_phi1^(k), k = 0..N


def _fd_weights(offsets, k: int):
    """Weights w with sum w_j f(x + o_j h) ~ h^k f^(k)(x)."""
    o = np.asarray(offsets, dtype=float)
    A = np.vander(o, increasing=True).T
    rhs = np.zeros(len(o))
    rhs[k] = math.factorial(k)
    return np.linalg.solve(A, rhs)


def _numeric_derivs(fun, t0: float, kmax: int, h0: float = 0.05):
    """Derivatives 0..kmax at t0 by central differences with Richardson extrapolation."""
    out = [float(fun(np.array([t0]))[0])]
    for k in range(1, kmax + 1):
        J = k // 2 + 1
        offs = np.arange(-J, J + 1)
        w = _fd_weights(offs, k)
        # symmetric stencils have an even error expansion in h
        table = []
        h = h0
        prev_best = None
        for level in range(8):
            val = float(np.dot(w, fun(t0 + offs * h))) / h**k
            row = [val]
            for j, prev in enumerate(table[-1] if table else []):
                fac = 4.0 ** (j + 1)
                row.append((fac * row[j] - prev) / (fac - 1.0))
            table.append(row)
            best = row[-1]
            if prev_best is not None and abs(best - prev_best) <= _RICHARDSON_TOL * max(1.0, abs(best)):
                break
            prev_best = best
            h /= 2.0
        else:
            raise ConvergenceError(f"derivative of order {k} did not stabilise")
        out.append(best)
    return np.array(out)


def _V_derivs(profile, x, n: int, kmax: int):
    if profile is None or getattr(profile, "is_zero", False):
        return np.zeros(kmax + 1)
    if _has_closed_form(profile, x, n):
        return V_time_derivatives(profile, x, 1.0, n, kmax)
    return _numeric_derivs(lambda tt: propagate(profile, x, tt, n)[1], 1.0, kmax)


def _v_derivs(profile, x, n: int, kmax: int):
    """d^k v/dt^k at t = 1 from v itself (used for the non-consolidated form)."""
    if profile is None or getattr(profile, "is_zero", False):
        return np.zeros(kmax + 1)
    if _has_closed_form(profile, x, n):
        return V_time_derivatives(profile, x, 1.0, n, kmax + 1)[1:]
    return _numeric_derivs(lambda tt: propagate(profile, x, tt, n)[0], 1.0, kmax)


def expansion_coeffs(phi0, phi1, x, N: int, n: int) -> ExpansionCoeffs:
    """Taylor coefficients of V_phi0, v_phi0, V_phi1 about t = 1 up to order N."""
    if N < 1:
        raise DomainError("N must be at least 1")
    x = _as_point(x, n)
    # profiles raise DomainError themselves when an order exceeds k_max
    fact = np.array([(-1) ** k / math.factorial(k) for k in range(N + 1)])
    V0 = _V_derivs(phi0, x, n, N) * fact
    V1 = _V_derivs(phi1, x, n, N) * fact
    v0 = _v_derivs(phi0, x, n, N - 1) * fact[:N]
    return ExpansionCoeffs(N, x, n, list(V0), list(v0), list(V1))


def asympt_eval(coeffs: ExpansionCoeffs, t: float, n: int | None = None,
                form: str = "consolidated") -> float:
    """Phi_asympt^(N)(x, e^-t).

    ``form='consolidated'`` uses only V^(k) (v^(k) = -(k+1) V^(k+1));
    ``form='original'`` uses the separately computed v^(k).
    """
    n = coeffs.n if n is None else n
    z = math.exp(-t)
    N = coeffs.N
    half = 0.5 * (n - 1)
    total = 0.0
    for k in range(N - 1, -1, -1):
        if form == "consolidated":
            c = half * coeffs.Vk0[k] - (k + 1) * coeffs.Vk0[k + 1] + coeffs.Vk1[k]
        elif form == "original":
            c = coeffs.vk0[k] + half * coeffs.Vk0[k] + coeffs.Vk1[k]
        else:
            raise DomainError(f"unknown form {form!r}")
        total = total * z + c
    return z**half * total


def remainder_V(profile, x, n: int, N: int, t: float) -> float:
    """R_{V,N}(x, t) = V(x, 1 - e^-t) - sum_{k<N} V^(k)(x) e^(-kt)."""
    x = _as_point(x, n)
    fact = np.array([(-1) ** k / math.factorial(k) for k in range(N)])
    c = _V_derivs(profile, x, n, N - 1) * fact
    z = math.exp(-t)
    _, V = propagate(profile, x, [-math.expm1(-t)], n)
    return float(V[0] - sum(c[k] * z**k for k in range(N)))


@dataclass
class DecayFit:
    rate: float
    c: float
    t: list = field(default_factory=list)
    phi: list = field(default_factory=list)
    phi_asympt: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    excluded: list = field(default_factory=list)  # times dropped at the rounding floor

    def __iter__(self):
        yield self.rate
        yield self.c


def decay_fit(pb: CauchyProblem, x, N: int, t_list) -> DecayFit:
    """Fit log|Phi - Phi_asympt^(N)| = log c + rate * t; expect rate ~ -(N + (n-1)/2)."""
    if pb.mp.knot_index != 0:
        raise DomainError("the expansion holds at the knot mu = 1/2 only")
    t_list = [float(t) for t in t_list]
    if min(t_list) < 3.0 or any(b <= a for a, b in zip(t_list, t_list[1:])):
        raise DomainError("t_list must be increasing with min >= 3")
    n = pb.n
    x = _as_point(x, n)
    coeffs = expansion_coeffs(pb.phi0, pb.phi1, x, N, n)
    fit = DecayFit(float("nan"), float("nan"))
    keep_t, keep_r = [], []
    for t in t_list:
        phi = float(solve_many(pb, [x], t)[0][0])
        pa = asympt_eval(coeffs, t, n)
        res = phi - pa
        fit.t.append(t)
        fit.phi.append(phi)
        fit.phi_asympt.append(pa)
        fit.residual.append(res)
        floor = _FLOOR_FACTOR * np.finfo(float).eps * max(abs(phi), abs(pa))
        if abs(res) <= floor or res == 0.0:
            fit.excluded.append(t)
        else:
            keep_t.append(t)
            keep_r.append(math.log(abs(res)))
    if len(keep_t) < 2:
        raise DomainError("fewer than two residuals above the rounding floor")
    slope, icpt = np.polyfit(keep_t, keep_r, 1)
    fit.rate, fit.c = float(slope), float(math.exp(icpt))
    return fit


def fit_to_csv(fit: DecayFit) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "phi", "phi_asympt", "residual"])
    for row in zip(fit.t, fit.phi, fit.phi_asympt, fit.residual):
        w.writerow(["%.17g" % v for v in row])
    return buf.getvalue()
