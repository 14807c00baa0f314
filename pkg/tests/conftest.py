"""Shared oracles: extended-precision kernels built straight from mpmath."""
import math

import mpmath as mpm
import pytest

from desitter_kg.profiles import default_bump

mpm.mp.dps = 40


def mp_E(kappa, z, t, t0):
    """E(z, t; 0, t0) evaluated term by term in 40-digit arithmetic."""
    kappa = mpm.mpc(kappa)
    z, t, t0 = mpm.mpf(z), mpm.mpf(t), mpm.mpf(t0)
    q, q0 = mpm.e ** (-t), mpm.e ** (-t0)
    X = (q0 + q) ** 2 - z * z
    Y = (q0 - q) ** 2 - z * z
    a = mpm.mpf(1) / 2 - kappa
    F = mpm.hyp2f1(a, a, 1, Y / X)
    return mpm.power(4, -kappa) * mpm.e ** (kappa * (t0 + t)) * mpm.power(X, kappa - mpm.mpf(1) / 2) * F


def mp_K1(kappa, z, t):
    return mp_E(kappa, z, t, 0)


def mp_K0(kappa, z, t):
    """-dE/dt0 at t0 = 0 by mpmath numerical differentiation."""
    return -mpm.diff(lambda b: mp_E(kappa, z, t, b), 0)


def mp_dK1(kappa, s, t):
    return mpm.diff(lambda x: mp_K1(kappa, x, t), s)


def kappa_of(n, m):
    half = n / 2.0
    if m <= half:
        return math.sqrt(half * half - m * m)
    return complex(0.0, -math.sqrt(m * m - half * half))


@pytest.fixture
def bump():
    return default_bump()


def fd_rel_error(n, m, phi0=None, phi1=None, dr=2e-3, grid=50, t_max=2.0, r_hi=0.98):
    """Relative L-infinity gap between the representation solver and the FD oracle."""
    import numpy as np

    from desitter_kg.desitter import CauchyProblem, solve_many
    from desitter_kg.fdref import FDConfig, fd_probe, fd_solve
    from desitter_kg.kernels import MassParams

    pb = CauchyProblem(MassParams.from_mass(n, m), phi0, phi1)
    fld = fd_solve(FDConfig(n, m, dr=dr, t_max=t_max), phi0, phi1)
    rs = np.linspace(0.0, r_hi, grid)
    ts = np.linspace(t_max / grid, t_max, grid)
    xs = [np.eye(n)[0] * r for r in rs]
    err, scale = 0.0, 0.0
    for t in ts:
        rep = solve_many(pb, xs, float(t))[0]
        ref = fd_probe(fld, rs, np.full_like(rs, t))
        err = max(err, float(np.max(np.abs(rep - ref))))
        scale = max(scale, float(np.max(np.abs(ref))))
    return err / scale
