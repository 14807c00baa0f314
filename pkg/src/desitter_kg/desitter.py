"""Representation-formula solver for the Klein-Gordon equation in de Sitter space.

Solves ``Phi_tt + n Phi_t - e^(-2t) Laplacian Phi + m^2 Phi = f`` with
``Phi(x, 0) = phi0``, ``Phi_t(x, 0) = phi1`` by

    Phi = e^(-(n-1)t/2) v0(x, ph)
          + e^(-nt/2) int_0^ph v0(x, r) (2 K0 + n K1)(r, t) dr
          + 2 e^(-nt/2) int_0^ph v1(x, r) K1(r, t) dr,        ph = 1 - e^(-t),

where v0, v1 are flat wave propagators.  The kernels are bounded on the
closed interval [0, ph], so the r-integrals are done directly with composite
Gauss-Legendre: panels break where the data support enters or leaves the
sphere of radius r about x, and the last panel is graded geometrically toward
ph, where the kernels vary on the scale e^(-t).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, ImaginaryResidueError
from .kernels import MassParams, _e_complex, kernel_pair
from .wave import _as_point, propagate, support_breakpoints

__all__ = [
    "CauchyProblem",
    "SeparableForcing",
    "SolutionField",
    "solve",
    "solve_many",
    "solve_field",
    "solve_small_mass",
    "solve_large_mass",
    "solve_knot_n1_massless",
    "solve_source",
    "generic_representation",
]

GL_NODES = 24
_IMAG_TOL = 1e-8

METHOD_KNOT = "knot_closed_form"
METHOD_SMALL = "representation/small"
METHOD_LARGE = "representation/large"
METHOD_SOURCE = "source"


@lru_cache(maxsize=8)
def _gl(npts: int):
    return np.polynomial.legendre.leggauss(npts)


@dataclass
class SeparableForcing:
    """Source term ``f(x, b) = g(b) * psi(x)``; ``g`` must accept numpy arrays."""

    g: Callable
    psi: object

    def __call__(self, x, b):
        return self.g(np.asarray(b, dtype=float)) * self.psi.value(np.asarray(x, dtype=float))


@dataclass
class CauchyProblem:
    mp: MassParams
    phi0: object = None
    phi1: object = None
    forcing: SeparableForcing | None = None

    def __post_init__(self):
        for name in ("phi0", "phi1"):
            p = getattr(self, name)
            if p is not None and not getattr(p, "is_zero", False):
                if not 0.0 < p.support_radius < 1.0:
                    raise DomainError(f"{name}: support radius must lie in (0, 1)")
        n = self.mp.n
        if n >= 4:
            for p in (self.phi0, self.phi1):
                if p is not None and not hasattr(p, "deriv"):
                    raise DomainError("n >= 4 needs radial profiles")

    @property
    def n(self) -> int:
        return self.mp.n

    @property
    def profiles(self):
        return [p for p in (self.phi0, self.phi1)
                if p is not None and not getattr(p, "is_zero", False)]

    def with_data(self, phi0=None, phi1=None) -> "CauchyProblem":
        return CauchyProblem(self.mp, phi0, phi1, self.forcing)


@dataclass
class SolutionField:
    samples: list = field(default_factory=list)  # (x, t, Phi)
    method: str = ""
    quadrature_nodes: int = 0
    mass: MassParams | None = None

    def values(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])


# ------------------------------------------------------------ quadrature

def _panel_edges(breaks, ph: float, q: float):
    edges = sorted({0.0, ph, *[b for b in breaks if 0.0 < b < ph]})
    return edges


def _graded(a: float, b: float, q: float):
    """Sub-edges of [a, b] shrinking by 4 toward b down to width ~ q/8."""
    L = b - a
    out = [a]
    w = L / 4.0
    while w > q / 8.0 and L > 2.0 * q:
        out.append(b - w)
        w /= 4.0
    out.append(b)
    return out


def _rule(edges, npts: int = GL_NODES):
    s, w = _gl(npts)
    a = np.asarray(edges[:-1])
    b = np.asarray(edges[1:])
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * s[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _active(profiles, x, n):
    """Support windows ``(lo, hi)`` in propagation time for each nonzero profile."""
    wins = []
    for p in profiles:
        lo, hi, compact = support_breakpoints(p, x, n)
        wins.append((lo, hi if compact else math.inf))
    return wins


def _nodes_for(profiles, x, n: int, ph: float, q: float):
    """Quadrature nodes/weights on [0, ph] for data at x; empty where all data vanish."""
    wins = _active(profiles, x, n)
    breaks = []
    for p in profiles:
        d = p.distance_from_center(x)
        R = p.support_radius
        breaks += [abs(d - R), d + R]
    edges = _panel_edges(breaks, ph, q)
    kept = []
    for a, b in zip(edges[:-1], edges[1:]):
        if any(b > lo and a < hi for lo, hi in wins):
            kept.append((a, b))
    if not kept:
        return np.zeros(0), np.zeros(0)
    pieces = []
    for a, b in kept:
        sub = _graded(a, b, q) if b == ph else [a, b]
        pieces.append(_rule(sub))
    return (np.concatenate([p[0] for p in pieces]),
            np.concatenate([p[1] for p in pieces]))


# --------------------------------------------------------------- kernels

def _knot_kernels(mp: MassParams):
    """Exact kernel pair at knots where a compact closed form is available."""
    if mp.knot_index == 0:
        return lambda s, t: (np.full(np.shape(s), -0.25 * math.exp(0.5 * t)),
                             np.full(np.shape(s), 0.5 * math.exp(0.5 * t)))
    if mp.knot_index == 1:
        def k(s, t):
            e = math.exp(1.5 * t)
            q2 = math.exp(-2.0 * t)
            return (0.125 * e * (3.0 * (s * s - q2) + 1.0),
                    0.25 * e * (1.0 + q2 - s * s))
        return k
    return lambda s, t: kernel_pair(mp, s, t)


# ----------------------------------------------------------------- engine

def _zero_like(xs):
    return np.zeros(len(xs))


def _head(phi0, x, n, ph):
    if phi0 is None or getattr(phi0, "is_zero", False):
        return 0.0
    v, _ = propagate(phi0, x, [ph], n)
    return float(v[0])


def generic_representation(pb: CauchyProblem, xs, t: float, kernel_fn=None):
    """Quadrature of the representation formula at the points ``xs`` and time t.

    Returns ``(values, node_count)``; values are complex for the large regime.
    ``kernel_fn(s, t) -> (K0, K1)`` overrides the kernels (used by knot paths).
    """
    n, mp = pb.n, pb.mp
    q = math.exp(-t)
    ph = -math.expm1(-t)
    if kernel_fn is None:
        kernel_fn = lambda s, tt: kernel_pair(mp, s, tt)
    profiles = pb.profiles
    per_x = [_nodes_for(profiles, x, n, ph, q) for x in xs]
    all_nodes = np.concatenate([p[0] for p in per_x]) if per_x else np.zeros(0)
    if all_nodes.size:
        K0, K1 = kernel_fn(all_nodes, t)
    out = np.zeros(len(xs), dtype=complex)
    pos = 0
    scale0 = math.exp(-0.5 * (n - 1) * t)
    scale = math.exp(-0.5 * n * t)
    for i, (x, (nodes, w)) in enumerate(zip(xs, per_x)):
        val = scale0 * _head(pb.phi0, x, n, ph)
        k = nodes.size
        if k:
            k0 = K0[pos:pos + k]
            k1 = K1[pos:pos + k]
            pos += k
            v0, _ = propagate(pb.phi0, x, nodes, n)
            v1, _ = propagate(pb.phi1, x, nodes, n)
            val = val + scale * np.sum(w * (v0 * (2.0 * k0 + n * k1) + 2.0 * v1 * k1))
        out[i] = val
    return out, int(all_nodes.size)


def _knot_half(pb: CauchyProblem, xs, t: float):
    """mu = 1/2: Phi = e^(-(n-1)t/2) [v0 + (n-1)/2 V0 + V1] at radius ph."""
    n = pb.n
    ph = -math.expm1(-t)
    out = np.zeros(len(xs))
    for i, x in enumerate(xs):
        v0, V0 = propagate(pb.phi0, x, [ph], n)
        _, V1 = propagate(pb.phi1, x, [ph], n)
        out[i] = math.exp(-0.5 * (n - 1) * t) * (v0[0] + 0.5 * (n - 1) * V0[0] + V1[0])
    return out


def _check_real(vals, what: str):
    vals = np.asarray(vals, dtype=complex)
    bad = np.abs(vals.imag) > _IMAG_TOL * np.maximum(1.0, np.abs(vals.real))
    if np.any(bad):
        raise ImaginaryResidueError(
            f"{what}: imaginary residue {float(np.max(np.abs(vals.imag))):.3e} too large"
        )
    return vals.real.copy()


def _points(pb: CauchyProblem, xs):
    return [_as_point(x, pb.n) for x in xs]


def _method_for(pb: CauchyProblem) -> str:
    if pb.mp.is_knot:
        return METHOD_KNOT
    return METHOD_SMALL if pb.mp.regime == "small" else METHOD_LARGE


def solve_many(pb: CauchyProblem, xs, t: float):
    """Phi at each point of ``xs`` at time t; returns ``(values, method, nodes)``."""
    if t < 0:
        raise DomainError("t must be non-negative")
    if pb.forcing is not None:
        if pb.profiles:
            raise DomainError("combine forced and unforced problems by linearity")
        vals = np.array([solve_source(pb, x, t) for x in xs])
        return vals, METHOD_SOURCE, 0
    pts = _points(pb, xs)
    method = _method_for(pb)
    if t == 0.0:
        vals = np.array([0.0 if pb.phi0 is None or pb.phi0.is_zero
                         else float(np.atleast_1d(pb.phi0.value(x[None]))[0]) for x in pts])
        return vals, method, 0
    if not pb.profiles:
        return _zero_like(pts), method, 0
    mp = pb.mp
    if mp.knot_index == 0:
        return _knot_half(pb, pts, t), method, 0
    if mp.is_knot:
        vals, nodes = generic_representation(pb, pts, t, _knot_kernels(mp))
        return vals.real, method, nodes
    vals, nodes = generic_representation(pb, pts, t)
    if mp.regime == "small":
        return vals.real, method, nodes
    return _check_real(vals, "large-mass solution"), method, nodes


def solve(pb: CauchyProblem, x, t: float) -> float:
    """Phi(x, t); routes to the knot fast path or the regime's representation."""
    vals, _, _ = solve_many(pb, [x], t)
    return float(vals[0])


def solve_field(pb: CauchyProblem, xs, ts) -> SolutionField:
    """Sample Phi on the product grid ``xs`` x ``ts`` (t outer, x inner)."""
    fld = SolutionField(mass=pb.mp)
    for t in ts:
        vals, method, nodes = solve_many(pb, xs, float(t))
        fld.method = method
        fld.quadrature_nodes += nodes
        for x, v in zip(xs, vals):
            fld.samples.append((np.atleast_1d(np.asarray(x, dtype=float)), float(t), float(v)))
    return fld


def solve_small_mass(pb: CauchyProblem, x, t: float) -> float:
    """Representation formula with real kernels (regime small); never uses fast paths."""
    if pb.mp.regime != "small":
        raise DomainError("solve_small_mass needs m <= n/2")
    if t <= 0:
        raise DomainError("t must be positive")
    vals, _ = generic_representation(pb, _points(pb, [x]), t)
    return float(vals[0].real)


def solve_large_mass(pb: CauchyProblem, x, t: float) -> float:
    """Representation formula with the continued kernels (regime large)."""
    if pb.mp.regime != "large":
        raise DomainError("solve_large_mass needs m >= n/2")
    if t <= 0:
        raise DomainError("t must be positive")
    vals, _ = generic_representation(pb, _points(pb, [x]), t)
    return float(_check_real(vals, "large-mass solution")[0])


def solve_knot_n1_massless(pb: CauchyProblem, x, t: float) -> float:
    """n = 1, m = 0: half-sum of phi0 at x -/+ ph plus half the integral of phi1."""
    if pb.n != 1 or pb.mp.m != 0.0:
        raise DomainError("solve_knot_n1_massless needs n = 1 and m = 0")
    if t < 0:
        raise DomainError("t must be non-negative")
    ph = -math.expm1(-t)
    xx = float(np.atleast_1d(x)[0])
    out = 0.0
    if pb.phi0 is not None and not pb.phi0.is_zero:
        out += 0.5 * float(pb.phi0.value(np.array([[xx - ph], [xx + ph]])).sum())
    if pb.phi1 is not None and not pb.phi1.is_zero:
        _, V = propagate(pb.phi1, [xx], [ph], 1)
        out += float(V[0])
    return out


# ------------------------------------------------------------ source term

def _time_panels(t: float, radii, npts: int = GL_NODES):
    """GL rule on [0, t] split where e^(-b) - e^(-t) crosses the given radii."""
    q = math.exp(-t)
    cuts = {0.0, t}
    for r in radii:
        if 0.0 < r < 1.0 - q:
            cuts.add(-math.log(r + q))
    edges = sorted(cuts)
    refined = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        k = max(1, math.ceil((b - a) / 0.5))
        refined += list(np.linspace(a, b, k + 1)[1:])
    return _rule(refined, npts)


def solve_source(pb: CauchyProblem, x, t: float) -> float:
    """Zero-data solution driven by a separable forcing ``g(b) psi(x)``.

    Phi = 2 e^(-nt/2) int_0^t db e^(nb/2) g(b) int_0^(e^-b - e^-t) v_psi(x, r) E(r, t; 0, b) dr.
    At mu = 1/2 the inner integral collapses to V_psi.
    """
    f = pb.forcing
    if f is None:
        raise DomainError("problem has no forcing")
    if pb.profiles:
        raise DomainError("solve_source expects zero initial data")
    if t < 0:
        raise DomainError("t must be non-negative")
    if t == 0.0 or getattr(f.psi, "is_zero", False):
        return 0.0
    n, mp = pb.n, pb.mp
    x = _as_point(x, n)
    psi = f.psi
    d = psi.distance_from_center(x)
    R = psi.support_radius
    b_nodes, b_w = _time_panels(t, [abs(d - R), d + R])
    g = np.asarray(f.g(b_nodes), dtype=float) * np.ones_like(b_nodes)
    rho = np.exp(-b_nodes) - math.exp(-t)
    if mp.knot_index == 0:
        _, V = propagate(psi, x, rho, n)
        integrand = np.exp(0.5 * (n + 1) * b_nodes) * g * V
        return float(math.exp(-0.5 * (n - 1) * t) * np.sum(b_w * integrand))
    total = 0.0 + 0.0j
    q = math.exp(-t)
    for b, wb, gb, rb in zip(b_nodes, b_w, g, rho):
        if gb == 0.0 or rb <= 0.0:
            continue
        nodes, w = _nodes_for([psi], x, n, rb, q)
        if nodes.size == 0:
            continue
        v, _ = propagate(psi, x, nodes, n)
        E = _e_complex(mp.kappa, nodes, t, b)
        total += wb * math.exp(0.5 * n * b) * gb * np.sum(w * v * E)
    val = 2.0 * math.exp(-0.5 * n * t) * total
    if mp.regime == "large":
        return float(_check_real([val], "forced solution")[0])
    return float(val.real)
