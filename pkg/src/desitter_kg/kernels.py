"""De Sitter kernels E, K0, K1 and their s-derivatives.

Both mass regimes go through one code path with a complex parameter
``kappa``: ``kappa = mu`` for small mass (m <= n/2) and ``kappa = -i mu``
for large mass, the latter being the analytic continuation that turns the
small-mass formulas into the large-mass ones.

Geometry used throughout, for a source time ``t0`` (0 for K0/K1)::

    q, q0 = exp(-t), exp(-t0)
    X = (q0 + q)**2 - z**2            # > 0 on the closed conoid
    Y = (q0 - q)**2 - z**2            # >= 0 inside, 0 on the conoid
    zeta = Y / X,  1 - zeta = 4 q q0 / X

``1 - zeta`` is formed from the right-hand side, never by subtraction, so the
hypergeometric connection formulas stay accurate when zeta is within
``exp(-t)`` of 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .special import hyp2f1_at_one, hyp2f1_reduced_vec, hyp2f1_vec

__all__ = [
    "MassParams",
    "KernelValue",
    "eval_E",
    "eval_K0",
    "eval_K1",
    "dK1_ds",
    "asymptotic_dK1_limit",
    "asymptotic_dcombo_limit",
    "kernel_pair",
]

_KNOT_TOL = 1e-12
_CONE_TOL = 1e-12


@dataclass(frozen=True)
class MassParams:
    """Spatial dimension, physical mass and the derived curved-mass parameter."""

    n: int
    m: float
    regime: str
    mu: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if self.m < 0:
            raise DomainError("mass must be non-negative")
        if self.regime not in ("small", "large"):
            raise DomainError(f"unknown regime {self.regime!r}")
        half = self.n / 2.0
        if self.regime == "small" and self.m > half:
            raise DomainError("small regime requires m <= n/2")
        if self.regime == "large" and self.m < half:
            raise DomainError("large regime requires m >= n/2")
        expected = math.sqrt(abs(half * half - self.m * self.m))
        if abs(expected - self.mu) > 1e-12 * max(1.0, expected):
            raise DomainError(f"mu={self.mu!r} inconsistent with n={self.n}, m={self.m}")

    @classmethod
    def from_mass(cls, n: int, m: float) -> "MassParams":
        half = n / 2.0
        if m <= half:
            mu = math.sqrt(half * half - m * m)
            k = round(mu - 0.5)
            if 0 <= k and abs(mu - (k + 0.5)) < _KNOT_TOL:
                mu = k + 0.5  # knot: keep the 2F1 parameters exact integers
            return cls(n, float(m), "small", mu)
        return cls(n, float(m), "large", math.sqrt(m * m - half * half))

    @classmethod
    def from_mu(cls, n: int, mu: float, regime: str = "small") -> "MassParams":
        """Build from the curved-mass parameter, e.g. ``from_mu(3, 0.5)`` for m = sqrt(2)."""
        half = n / 2.0
        if regime == "small":
            if mu > half:
                raise DomainError("small-regime mu cannot exceed n/2")
            m = math.sqrt(max(half * half - mu * mu, 0.0))
        else:
            m = math.sqrt(half * half + mu * mu)
        return cls(n, m, regime, float(mu))

    @property
    def kappa(self) -> complex:
        """Kernel parameter: mu for small mass, -i mu for large mass."""
        return complex(self.mu) if self.regime == "small" else complex(0.0, -self.mu)

    @property
    def knot_index(self) -> int | None:
        if self.regime != "small":
            return None
        k = round(self.mu - 0.5)
        if 0 <= k <= (self.n - 1) // 2 and abs(self.mu - (k + 0.5)) < _KNOT_TOL:
            return k
        return None

    @property
    def is_knot(self) -> bool:
        return self.knot_index is not None


@dataclass(frozen=True)
class KernelValue:
    re: float | np.ndarray
    im: float | np.ndarray

    @classmethod
    def from_complex(cls, value) -> "KernelValue":
        value = np.asarray(value)
        if value.ndim == 0:
            value = complex(value)
            return cls(value.real, value.imag)
        return cls(value.real.copy(), value.imag.copy())

    @property
    def value(self):
        return self.re + 1j * self.im


def _geometry(z, t, t0):
    z = np.asarray(z, dtype=float)
    q, q0 = math.exp(-t), math.exp(-t0)
    gap = abs(q0 - q)
    if np.any(z < 0) or np.any(z > gap * (1 + _CONE_TOL) + _CONE_TOL):
        raise DomainError(
            f"z must lie in [0, {gap:.17g}] (inside the characteristic conoid)"
        )
    X = (q0 + q) ** 2 - z * z
    Y = np.maximum((gap - z) * (gap + z), 0.0)
    zeta = Y / X
    omz = 4.0 * q * q0 / X
    return z, q, X, Y, zeta, omz


def _power(base, expo: complex):
    return np.exp(expo * np.log(base))


def _e_complex(kappa: complex, z, t: float, t0: float):
    z, q, X, Y, zeta, omz = _geometry(z, t, t0)
    a = 0.5 - kappa
    F = hyp2f1_vec(a, a, 1.0, zeta, omz)
    return np.exp(kappa * (t + t0 - math.log(4.0))) * _power(X, kappa - 0.5) * F


def kernel_pair(mp: MassParams, z, t: float):
    """Complex arrays (K0, K1) at radii ``z`` and time ``t``; shares the 2F1 work."""
    kappa = mp.kappa
    z, q, X, Y, zeta, omz = _geometry(z, t, 0.0)
    a = 0.5 - kappa
    g1 = hyp2f1_reduced_vec(a, a, 1.0, zeta, omz)
    g2 = hyp2f1_reduced_vec(a - 1.0, a, 1.0, zeta, omz)
    F1 = 1.0 + zeta * g1
    pref = np.exp(kappa * (t - math.log(4.0))) * _power(X, kappa - 0.5)
    k1 = pref * F1
    # the bracket of K0 vanishes on the conoid together with Y; dividing out Y
    # analytically leaves -1/2 + (A G1 + (1/2 + kappa) B G2) / X
    A = q - 1.0 + kappa * (q * q - 1.0 - z * z)
    B = 1.0 - q * q + z * z
    k0 = pref * (-0.5 + (A * g1 + (0.5 + kappa) * B * g2) / X)
    return k0, k1


def eval_E(mp: MassParams, x_minus_x0_norm, t: float, t0: float) -> KernelValue:
    """E(x, t; x0, t0) for |x - x0| inside the chronological future or past of (x0, t0)."""
    return KernelValue.from_complex(_e_complex(mp.kappa, x_minus_x0_norm, t, t0))


def eval_K1(mp: MassParams, z, t: float) -> KernelValue:
    """K1(z, t) = E(z, t; 0, 0), for 0 <= z <= 1 - exp(-t)."""
    return KernelValue.from_complex(_e_complex(mp.kappa, z, t, 0.0))


def eval_K0(mp: MassParams, z, t: float) -> KernelValue:
    """K0(z, t) = -dE/dt0 at t0 = 0, for 0 <= z <= 1 - exp(-t).

    Finite on the whole closed conoid: the apparent 1/((1-e^-t)^2 - z^2) pole is
    cancelled by a zero of the bracket, and that cancellation is done exactly.
    """
    k0, _ = kernel_pair(mp, z, t)
    return KernelValue.from_complex(k0)


def dK1_ds(mp: MassParams, s, t: float) -> KernelValue:
    """Partial derivative of K1(s, t) in s."""
    kappa = mp.kappa
    s, q, X, Y, zeta, omz = _geometry(s, t, 0.0)
    a = 0.5 - kappa
    F1 = hyp2f1_vec(a, a, 1.0, zeta, omz)
    F2 = hyp2f1_vec(a + 1.0, a + 1.0, 2.0, zeta, omz)
    pref = np.exp(kappa * (t - math.log(4.0)))
    val = pref * (
        2.0 * s * a * _power(X, kappa - 1.5) * F1
        - 8.0 * s * q * a * a * _power(X, kappa - 2.5) * F2
    )
    return KernelValue.from_complex(val)


def _check_limit_args(mp: MassParams, s):
    if mp.regime != "small" or mp.mu <= 0:
        raise DomainError("large-t limits need the small regime with mu > 0")
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(s >= 1):
        raise DomainError("s must lie in [0, 1)")
    return s


def asymptotic_dK1_limit(mp: MassParams, s):
    """Limit of 4^mu e^(-mu t) dK1/ds as t -> infinity."""
    s = _check_limit_args(mp, s)
    mu = mp.mu
    f1 = hyp2f1_at_one(0.5 - mu, 0.5 - mu, 1.0)
    out = -2.0 * (mu - 0.5) * f1 * s * (1.0 - s * s) ** (mu - 1.5)
    return float(out) if out.ndim == 0 else out


def asymptotic_dcombo_limit(mp: MassParams, s):
    """Limit of 2^(1+2mu) e^(-mu t) d/ds (2 K0 + n K1) as t -> infinity."""
    s = _check_limit_args(mp, s)
    mu, n = mp.mu, mp.n
    f1 = hyp2f1_at_one(0.5 - mu, 0.5 - mu, 1.0)
    shape = s * s * (mu - n / 2.0) + mu + n / 2.0 - 3.0
    out = -8.0 * (1.0 - s * s) ** (mu - 2.5) * s * (mu - 0.5) * shape * f1
    return float(out) if out.ndim == 0 else out
