"""Compactly supported initial data with analytic derivatives.

A radial profile is a function ``f(r)`` on the real line, even in ``r``,
vanishing for ``|r| >= support_radius``.  Besides values it supplies

* ``deriv(r, k)`` -- the k-th derivative of the even extension,
* ``antideriv(r)`` -- the odd antiderivative ``int_0^r f``,
* ``moment(r)`` -- ``int_R^r s f(s) ds``, which is zero outside the support,

which is everything the flat wave propagators need to avoid sampling noise.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import hermite as _herm

from .errors import DomainError

__all__ = [
    "RadialProfile",
    "PolynomialBump",
    "TruncatedGaussian",
    "ZeroProfile",
    "RadialCombination",
    "FunctionProfile",
    "default_bump",
]

_VALIDATION_TOL = 1e-6


class RadialProfile:
    """Base class: an even, compactly supported function of one variable.

    ``center`` places the profile in R^n; ``value``/``gradient`` evaluate it at
    points of R^n as ``f(|y - center|)``.
    """

    support_radius: float
    k_max: int
    exact_support: bool = True

    def __init__(self, support_radius: float, k_max: int, center=None):
        if not 0.0 < support_radius < 1.0:
            raise DomainError(
                f"support radius must lie in (0, 1), got {support_radius!r}"
            )
        self.support_radius = float(support_radius)
        self.k_max = int(k_max)
        self.center = None if center is None else np.asarray(center, dtype=float)

    # one-dimensional interface --------------------------------------------
    def __call__(self, r):
        return self.deriv(r, 0)

    def deriv(self, r, k: int):
        raise NotImplementedError

    def antideriv(self, r):
        raise NotImplementedError

    def moment(self, r):
        raise NotImplementedError

    def moment_deriv(self, r, k: int):
        """k-th derivative of ``moment``: (r f)^(k-1) = r f^(k-1) + (k-1) f^(k-2)."""
        if k == 0:
            return self.moment(r)
        r = np.asarray(r, dtype=float)
        out = r * self.deriv(r, k - 1)
        if k >= 2:
            out = out + (k - 1) * self.deriv(r, k - 2)
        return out

    @property
    def sup_norm(self) -> float:
        r = np.linspace(0.0, self.support_radius, 2001)
        return float(np.max(np.abs(self(r))))

    @property
    def is_zero(self) -> bool:
        return False

    # points in R^n ----------------------------------------------------------
    def _offset(self, pts):
        pts = np.asarray(pts, dtype=float)
        if self.center is None:
            return pts
        return pts - self.center

    def value(self, pts):
        d = self._offset(pts)
        return self(np.sqrt(np.sum(d * d, axis=-1)))

    def gradient(self, pts):
        d = self._offset(pts)
        r = np.sqrt(np.sum(d * d, axis=-1))
        safe = np.where(r > 0, r, 1.0)
        scale = np.where(r > 0, self.deriv(r, 1) / safe, 0.0)
        return d * scale[..., None]

    def distance_from_center(self, x) -> float:
        d = self._offset(np.atleast_1d(np.asarray(x, dtype=float)))
        return float(np.sqrt(np.sum(d * d)))

    def shifted(self, center) -> "RadialProfile":
        """A copy of this profile centred at ``center``."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.center = np.asarray(center, dtype=float)
        return clone

    def _require_order(self, k: int):
        if k > self.k_max:
            raise DomainError(
                f"derivative order {k} exceeds k_max={self.k_max} of {type(self).__name__}"
            )

    def validate(self, orders: int = 4, points: int = 7):
        """Check supplied derivatives against 4th-order central differences."""
        R = self.support_radius
        r = np.linspace(0.05 * R, 0.9 * R, points)
        h = 1e-3 * R
        for k in range(1, min(orders, self.k_max) + 1):
            f = lambda x: self.deriv(x, k - 1)
            fd = (f(r - 2 * h) - 8 * f(r - h) + 8 * f(r + h) - f(r + 2 * h)) / (12 * h)
            exact = self.deriv(r, k)
            scale = max(1.0, float(np.max(np.abs(exact))))
            if np.max(np.abs(fd - exact)) > _VALIDATION_TOL * scale:
                raise DomainError(
                    f"{type(self).__name__}: derivative of order {k} disagrees with "
                    "finite differences"
                )


class PolynomialBump(RadialProfile):
    """``amplitude * (R^2 - r^2)^power`` on ``|r| < R``; C^(power-1) at the edge.

    The default amplitude ``R^(-2 power)`` gives unit sup-norm.
    """

    def __init__(self, radius: float = 0.5, power: int = 8, amplitude=None,
                 center=None, validate: bool = True):
        if int(power) != power or power < 1:
            raise DomainError("power must be a positive integer")
        # derivatives of order >= power jump at the support edge
        super().__init__(radius, k_max=int(power) - 1, center=center)
        self.power = int(power)
        self.amplitude = float(radius ** (-2 * power) if amplitude is None else amplitude)
        if validate:
            self.validate()

    def deriv(self, r, k: int):
        self._require_order(k)
        r = np.asarray(r, dtype=float)
        R, p = self.support_radius, self.power
        a = np.clip(R - r, 0.0, None)
        b = np.clip(R + r, 0.0, None)
        # Leibniz on (R - r)^p (R + r)^p keeps full relative accuracy near the edge
        total = np.zeros(np.shape(r))
        for j in range(k + 1):
            if j > p or k - j > p:
                continue
            da = (-1) ** j * math.perm(p, j) * a ** (p - j)
            db = math.perm(p, k - j) * b ** (p - k + j)
            total = total + math.comb(k, j) * da * db
        inside = np.abs(r) < R
        out = np.where(inside, self.amplitude * total, 0.0)
        return out if out.ndim else float(out)

    def _poly(self):
        R, p = self.support_radius, self.power
        base = np.polynomial.Polynomial([R * R, 0.0, -1.0])
        return self.amplitude * base ** p

    def antideriv(self, r):
        r = np.asarray(r, dtype=float)
        R = self.support_radius
        P = self._poly().integ()
        out = np.sign(r) * P(np.minimum(np.abs(r), R))
        return out if out.ndim else float(out)

    def moment(self, r):
        r = np.asarray(r, dtype=float)
        R, p = self.support_radius, self.power
        u = np.clip(R * R - r * r, 0.0, None)
        out = -self.amplitude * u ** (p + 1) / (2.0 * (p + 1))
        return out if out.ndim else float(out)

    @property
    def sup_norm(self) -> float:
        return abs(self.amplitude) * self.support_radius ** (2 * self.power)


class TruncatedGaussian(RadialProfile):
    """``amplitude * exp(-r^2 / sigma^2)`` cut off at ``radius``.

    The cut leaves a jump of size ``exp(-R^2/sigma^2)``, so ``exact_support`` is
    False: identities that rely on smoothness at the edge hold only up to it.
    """

    exact_support = False

    def __init__(self, radius: float = 0.5, sigma: float = 0.1, amplitude: float = 1.0,
                 k_max: int = 12, center=None, validate: bool = True):
        super().__init__(radius, k_max=k_max, center=center)
        if sigma <= 0:
            raise DomainError("sigma must be positive")
        self.sigma = float(sigma)
        self.amplitude = float(amplitude)
        if validate:
            self.validate()

    @property
    def edge_jump(self) -> float:
        return abs(self.amplitude) * math.exp(-(self.support_radius / self.sigma) ** 2)

    def deriv(self, r, k: int):
        self._require_order(k)
        r = np.asarray(r, dtype=float)
        u = r / self.sigma
        coef = np.zeros(k + 1)
        coef[k] = 1.0
        val = self.amplitude * (-1.0 / self.sigma) ** k * _herm.hermval(u, coef) * np.exp(-u * u)
        out = np.where(np.abs(r) < self.support_radius, val, 0.0)
        return out if out.ndim else float(out)

    def antideriv(self, r):
        r = np.asarray(r, dtype=float)
        rr = np.clip(r, -self.support_radius, self.support_radius)
        erf = np.vectorize(math.erf, otypes=[float])
        out = self.amplitude * self.sigma * math.sqrt(math.pi) / 2.0 * erf(rr / self.sigma)
        return out if out.ndim else float(out)

    def moment(self, r):
        r = np.asarray(r, dtype=float)
        R, s2 = self.support_radius, self.sigma ** 2
        val = -0.5 * self.amplitude * s2 * (np.exp(-r * r / s2) - math.exp(-R * R / s2))
        out = np.where(np.abs(r) < R, val, 0.0)
        return out if out.ndim else float(out)

    @property
    def sup_norm(self) -> float:
        return abs(self.amplitude)


class ZeroProfile(RadialProfile):
    """The zero datum."""

    def __init__(self):
        super().__init__(0.5, k_max=10**6)

    def deriv(self, r, k: int):
        out = np.zeros(np.shape(r))
        return out if out.ndim else 0.0

    def antideriv(self, r):
        return self.deriv(r, 0)

    def moment(self, r):
        return self.deriv(r, 0)

    @property
    def sup_norm(self) -> float:
        return 0.0

    @property
    def is_zero(self) -> bool:
        return True


class RadialCombination(RadialProfile):
    """Linear combination ``sum c_i f_i`` of radial profiles sharing one centre."""

    def __init__(self, terms):
        terms = [(float(c), p) for c, p in terms]
        if not terms:
            raise DomainError("empty combination")
        centers = {None if p.center is None else tuple(p.center) for _, p in terms}
        if len(centers) > 1:
            raise DomainError("all terms of a combination must share a centre")
        radius = max(p.support_radius for _, p in terms)
        super().__init__(radius, k_max=min(p.k_max for _, p in terms),
                         center=terms[0][1].center)
        self.terms = terms
        self.exact_support = all(p.exact_support for _, p in terms)

    def _combine(self, method, *args):
        return sum(c * getattr(p, method)(*args) for c, p in self.terms)

    def deriv(self, r, k: int):
        self._require_order(k)
        return self._combine("deriv", r, k)

    def antideriv(self, r):
        return self._combine("antideriv", r)

    def moment(self, r):
        # moment is anchored at each term's own radius; shift to the common one
        return sum(c * (p.moment(r) - p.moment(self.support_radius))
                   for c, p in self.terms)


class FunctionProfile:
    """Arbitrary (non-radial) datum on R^n given by ``value`` and ``gradient`` callables.

    Only the quadrature propagators (n <= 3) accept it.  ``support_radius`` bounds
    ``|y - center|`` over the support.
    """

    exact_support = True
    is_zero = False

    def __init__(self, value, gradient, support_radius: float, center=None,
                 sup_norm: float | None = None):
        if not 0.0 < support_radius < 1.0:
            raise DomainError("support radius must lie in (0, 1)")
        self._value = value
        self._gradient = gradient
        self.support_radius = float(support_radius)
        self.center = None if center is None else np.asarray(center, dtype=float)
        self._sup = sup_norm

    def value(self, pts):
        return self._value(np.asarray(pts, dtype=float))

    def gradient(self, pts):
        return self._gradient(np.asarray(pts, dtype=float))

    def distance_from_center(self, x) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        d = x if self.center is None else x - self.center
        return float(np.sqrt(np.sum(d * d)))

    @property
    def sup_norm(self) -> float:
        if self._sup is None:
            raise DomainError("sup_norm unknown for this FunctionProfile")
        return self._sup


def default_bump() -> PolynomialBump:
    """``(0.5^2 - r^2)^8`` normalised to unit sup-norm."""
    return PolynomialBump(radius=0.5, power=8)
