"""Finite-difference reference solver, independent of the kernel machinery.

Explicit leapfrog for ``Phi_tt + n Phi_t - e^(-2t) L Phi + m^2 Phi = f`` with
the damping term centred in time.  ``L`` is the radial Laplacian
``d_rr + (n-1)/r d_r`` (``n d_rr`` on the axis) for n >= 2 and ``d_xx`` on a
symmetric interval for n = 1.  The outer boundary copies the neighbour
(zero gradient); with ``r_max > support + 1`` the horizon never reaches it.

Binary dump layout (little-endian)::

    b"KGFD"  uint32 version  int32 n  float64 m  float64 dr  float64 dt
    uint64 nt  uint64 nr  float64 r_min
    nt * nr float64, row-major (time-major)
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BlowUpError, CFLError, DomainError

__all__ = [
    "FDConfig",
    "FDField",
    "fd_solve",
    "fd_probe",
    "dump_field",
    "load_field",
    "self_convergence_order",
    "max_stable_dt",
]

_MAGIC = b"KGFD"
_VERSION = 1
_HEADER = struct.Struct("<4sIidddQQd")
_BLOWUP = 1e6


@dataclass
class FDConfig:
    n: int
    m: float
    dr: float = 2e-3
    dt: float | None = None  # default: largest stable step landing on t_max
    t_max: float = 2.0
    r_max: float | None = None  # default support + 1.05
    scheme_order: int = 2
    store_every: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")
        if self.scheme_order != 2:
            raise DomainError("only the second-order scheme is implemented")
        limit = max_stable_dt(self.n, self.dr)
        if self.dt is None:
            self.dt = self.t_max / math.ceil(self.t_max / limit)
        if self.dt > limit * (1 + 1e-12):
            raise CFLError(f"dt={self.dt} exceeds the stable step {limit} for n={self.n}")


def max_stable_dt(n: int, dr: float) -> float:
    """0.9 dr, tightened by sqrt(2/n) because the axis row n d_rr has eigenvalue ~2n/dr^2."""
    return 0.9 * dr * min(1.0, math.sqrt(2.0 / n))


@dataclass
class FDField:
    n: int
    m: float
    r: np.ndarray  # spatial nodes (signed for n = 1)
    t: np.ndarray  # stored times
    values: np.ndarray  # shape (len(t), len(r))

    @property
    def dr(self) -> float:
        return float(self.r[1] - self.r[0])

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0


def _laplacian(u, n, dr, inv_r):
    lap = np.empty_like(u)
    if n == 1:
        lap[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / dr**2
        lap[0] = 2 * (u[1] - u[0]) / dr**2
        lap[-1] = 2 * (u[-2] - u[-1]) / dr**2
        return lap
    lap[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / dr**2 + (n - 1) * inv_r[1:-1] * (
        u[2:] - u[:-2]) / (2 * dr)
    lap[0] = n * 2 * (u[1] - u[0]) / dr**2
    lap[-1] = 2 * (u[-2] - u[-1]) / dr**2
    return lap


def _grid(cfg: FDConfig, radius: float):
    r_max = cfg.r_max if cfg.r_max is not None else radius + 1.05
    nr = int(math.ceil(r_max / cfg.dr)) + 1
    r = cfg.dr * np.arange(nr)
    if cfg.n == 1:
        r = np.concatenate([-r[:0:-1], r])
    return r


def _radius_of(*profiles):
    rs = [p.support_radius for p in profiles
          if p is not None and not getattr(p, "is_zero", False)]
    return max(rs) if rs else 0.5


def _sample(profile, r):
    if profile is None or getattr(profile, "is_zero", False):
        return np.zeros_like(r)
    if getattr(profile, "center", None) is not None and np.any(profile.center != 0):
        raise DomainError("the FD oracle needs data radial about the origin")
    return np.asarray(profile(np.abs(r)), dtype=float)


def fd_solve(cfg: FDConfig, phi0=None, phi1=None, forcing=None) -> FDField:
    """March from t = 0 to ``cfg.t_max``.

    ``forcing`` may be a callable ``f(r, t)`` or an object with ``g`` and ``psi``
    attributes (separable ``g(t) psi(r)``).
    """
    fpsi = getattr(forcing, "psi", None)
    r = _grid(cfg, _radius_of(phi0, phi1, fpsi))
    n, m2, dr, dt = cfg.n, cfg.m**2, cfg.dr, cfg.dt
    with np.errstate(divide="ignore"):
        inv_r = np.where(r != 0, 1.0 / np.abs(r), 0.0)

    if forcing is None:
        fterm: Callable = lambda t: 0.0
    elif fpsi is not None:
        psi_r = _sample(fpsi, r)
        fterm = lambda t: float(forcing.g(np.asarray(t))) * psi_r
    else:
        fterm = lambda t: forcing(r, t)

    steps = int(round(cfg.t_max / dt))
    if abs(steps * dt - cfg.t_max) > 1e-9 * max(1.0, cfg.t_max):
        steps = int(math.ceil(cfg.t_max / dt))
    u0 = _sample(phi0, r)
    u1 = _sample(phi1, r)

    stored_t = [0.0]
    stored = [u0.copy()]
    acc0 = -n * u1 + _laplacian(u0, n, dr, inv_r) - m2 * u0 + fterm(0.0)
    prev, cur = u0, u0 + dt * u1 + 0.5 * dt * dt * acc0

    a_plus = 1.0 / dt**2 + n / (2 * dt)
    a_minus = 1.0 / dt**2 - n / (2 * dt)
    for j in range(1, steps + 1):
        tj = j * dt
        if j % cfg.store_every == 0:
            stored_t.append(tj)
            stored.append(cur.copy())
        if j == steps:
            break
        rhs = (2.0 * cur / dt**2 - a_minus * prev
               + math.exp(-2.0 * tj) * _laplacian(cur, n, dr, inv_r)
               - m2 * cur + fterm(tj))
        prev, cur = cur, rhs / a_plus
        if not np.all(np.isfinite(cur)) or np.max(np.abs(cur)) > _BLOWUP:
            raise BlowUpError(f"FD solution exceeded {_BLOWUP:g} at t={tj:.4g}")
    return FDField(n, cfg.m, r, np.array(stored_t), np.array(stored))


def fd_probe(field: FDField, r, t):
    """Bilinear interpolation in (r, t); raises outside the grid."""
    r = np.asarray(r, dtype=float)
    t = np.asarray(t, dtype=float)
    rg, tg = field.r, field.t
    eps = 1e-12
    if np.any(r < rg[0] - eps) or np.any(r > rg[-1] + eps) or np.any(t < tg[0] - eps) \
            or np.any(t > tg[-1] + eps):
        raise DomainError("probe point outside the FD grid")
    fr = np.clip((r - rg[0]) / (rg[1] - rg[0]), 0, len(rg) - 1)
    ft = np.clip((t - tg[0]) / (tg[1] - tg[0]), 0, len(tg) - 1)
    i = np.minimum(fr.astype(int), len(rg) - 2)
    j = np.minimum(ft.astype(int), len(tg) - 2)
    a = fr - i
    b = ft - j
    V = field.values
    out = ((1 - a) * (1 - b) * V[j, i] + a * (1 - b) * V[j, i + 1]
           + (1 - a) * b * V[j + 1, i] + a * b * V[j + 1, i + 1])
    return float(out) if out.ndim == 0 else out


def dump_field(field: FDField, path) -> None:
    nt, nr = field.values.shape
    header = _HEADER.pack(_MAGIC, _VERSION, field.n, field.m, field.dr, field.dt,
                          nt, nr, float(field.r[0]))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def load_field(path) -> FDField:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, version, n, m, dr, dt, nt, nr, r_min = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _VERSION:
        raise DomainError("not an FD field dump")
    vals = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size, count=nt * nr)
    return FDField(n, m, r_min + dr * np.arange(nr), dt * np.arange(nt),
                   vals.reshape(nt, nr).copy())


def self_convergence_order(cfg: FDConfig, phi0=None, phi1=None, forcing=None,
                           r_probe=None, t_probe=None) -> float:
    """Observed order from runs at dr, dr/2, dr/4 (fixed dt/dr), compared at t_max."""
    fields = []
    for k in range(3):
        c = FDConfig(cfg.n, cfg.m, dr=cfg.dr / 2**k, dt=cfg.dt / 2**k, t_max=cfg.t_max,
                     r_max=cfg.r_max)
        fields.append(fd_solve(c, phi0, phi1, forcing))
    t_probe = cfg.t_max if t_probe is None else t_probe
    if r_probe is None:
        r_probe = cfg.dr * np.arange(int(1.0 / cfg.dr) + 1)
    u = [fd_probe(f, r_probe, t_probe) for f in fields]
    e1 = np.max(np.abs(u[0] - u[1]))
    e2 = np.max(np.abs(u[1] - u[2]))
    return math.log2(e1 / e2)
