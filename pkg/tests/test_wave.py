import math

import mpmath as mpm
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from desitter_kg.errors import DomainError
from desitter_kg.profiles import FunctionProfile, PolynomialBump, RadialCombination, default_bump
from desitter_kg.wave import (
    V_time_derivatives,
    dalembert,
    descent2d_v_V,
    kirchhoff_v_V,
    origin_operator_terms,
    propagate,
    radial_origin_vV,
    spherical_mean,
    support_breakpoints,
)


# --------------------------------------------------------------- FD oracles

def _leapfrog_1d(u0, u1, dx, t_end, courant=0.5):
    """u_tt = u_xx on a padded interval, odd or even data handled by the caller."""
    steps = int(round(t_end / (courant * dx)))
    dt = t_end / steps
    c2 = (dt / dx) ** 2
    lap = lambda u: np.concatenate([[0.0], u[2:] - 2 * u[1:-1] + u[:-2], [0.0]])
    prev = u0.copy()
    cur = u0 + dt * u1 + 0.5 * c2 * lap(u0)
    for _ in range(steps - 1):
        prev, cur = cur, 2 * cur - prev + c2 * lap(cur)
    return cur


def _fd_radial_2d(phi1, dr, t_end):
    r = dr * np.arange(int(1.5 / dr))
    steps = int(round(t_end / (0.4 * dr)))
    dt = t_end / steps

    def lap(u):
        out = np.zeros_like(u)
        out[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / dr**2 + (u[2:] - u[:-2]) / (2 * dr * r[1:-1])
        out[0] = 4 * (u[1] - u[0]) / dr**2
        return out

    u1 = phi1(r)
    prev = np.zeros_like(r)
    cur = dt * u1 + dt**3 / 6 * lap(u1)
    for _ in range(steps - 1):
        prev, cur = cur, 2 * cur - prev + dt * dt * lap(cur)
    return cur[0]


# --------------------------------------------------------------- n = 1

def test_dalembert_constant_datum():
    c = PolynomialBump(radius=0.9, power=4)
    # near the centre of a very flat-topped datum: compare to the half-sum itself
    v, V = dalembert(c, None, 0.0, 0.05)
    assert v == pytest.approx(0.5 * (c(0.05) + c(-0.05)), rel=1e-15)
    assert V == 0.0


def test_dalembert_full_mass_capture():
    b = default_bump()
    mass = 2 * b.antideriv(0.5)
    unit = PolynomialBump(radius=0.5, power=8, amplitude=b.amplitude / mass)
    _, V = dalembert(None, unit, 0.0, 0.7)
    assert V == pytest.approx(0.5, rel=1e-14)


def test_dalembert_against_fd():
    b = default_bump()
    dx = 5e-4
    x = dx * np.arange(-2000, 2001)
    u = _leapfrog_1d(b(np.abs(x)), np.zeros_like(x), dx, 0.3)
    v, _ = dalembert(b, None, 0.0, 0.3)
    assert v == pytest.approx(u[2000], rel=1e-4)
    assert v == pytest.approx(b(0.3), rel=1e-14)


def test_dalembert_domain():
    with pytest.raises(DomainError):
        dalembert(default_bump(), None, 0.0, -0.1)


# --------------------------------------------------------------- spherical means

def test_spherical_mean_radial_at_origin():
    b = default_bump()
    assert spherical_mean(b, np.zeros(3), 0.3) == b(0.3)


def test_spherical_mean_of_locally_constant():
    wide = FunctionProfile(lambda p: np.ones(p.shape[:-1]), lambda p: np.zeros_like(p), 0.9)
    assert spherical_mean(wide, np.zeros(3), 0.01) == pytest.approx(1.0, rel=1e-14)
    assert spherical_mean(wide, np.zeros(2), 0.01, n=2) == pytest.approx(1.0, rel=1e-14)


def test_spherical_mean_off_origin_matches_radial_formula():
    # for radial f about 0, mean over |y - x| = rho equals (1/(2 r rho)) int_{|r-rho|}^{r+rho} s f(s) ds
    b = default_bump()
    x = np.array([0.2, 0.1, 0.0])
    r, rho = float(np.linalg.norm(x)), 0.4
    f = lambda s: mpm.mpf(2) ** 16 * (mpm.mpf(1) / 4 - s * s) ** 8 if s < 0.5 else 0
    ref = float(mpm.quad(lambda s: s * f(s), [abs(r - rho), 0.5])) / (2 * r * rho)
    assert spherical_mean(b, x, rho) == pytest.approx(ref, rel=1e-10)
    # force the quadrature by hiding the radial structure
    fp = FunctionProfile(lambda p: b(np.linalg.norm(p, axis=-1)),
                         lambda p: b.gradient(p), 0.5)
    assert spherical_mean(fp, x, rho) == pytest.approx(ref, rel=1e-10)


# --------------------------------------------------------------- n = 3

def test_kirchhoff_origin_radial():
    b = default_bump()
    for t in (0.1, 0.3, 0.45):
        v, V = kirchhoff_v_V(b, b, np.zeros(3), t)
        assert V == pytest.approx(t * b(t), rel=1e-14)
        assert v == pytest.approx(b(t) + t * b.deriv(t, 1), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("t", [1.01, 1.5, 3.0])
def test_kirchhoff_strong_huygens(t):
    v, V = kirchhoff_v_V(default_bump(), default_bump(), np.zeros(3), t)
    assert v == 0.0 and V == 0.0


def test_kirchhoff_against_fd():
    b = default_bump()
    dx = 5e-4
    x = dx * np.arange(-2000, 2001)
    w = _leapfrog_1d(np.zeros_like(x), x * b(np.abs(x)), dx, 0.5)
    ref = w[2000 + 400] / 0.2
    _, V = kirchhoff_v_V(None, b, np.array([0.2, 0.0, 0.0]), 0.5)
    assert V == pytest.approx(ref, rel=1e-4)


@pytest.mark.parametrize("x", [[0.2, 0.0, 0.0], [0.1, -0.3, 0.25], [0.0, 0.0, 0.6]])
@pytest.mark.parametrize("t", [0.2, 0.5, 0.9])
def test_kirchhoff_quadrature_matches_closed_form(x, t):
    b = default_bump()
    exact = kirchhoff_v_V(b, b, np.array(x), t)
    quad = kirchhoff_v_V(b, b, np.array(x), t, method="quadrature")
    assert quad[0] == pytest.approx(exact[0], rel=1e-8, abs=1e-10)
    assert quad[1] == pytest.approx(exact[1], rel=1e-8, abs=1e-10)


# --------------------------------------------------------------- odd n at the origin

def test_origin_operator_n3_and_n5():
    assert origin_operator_terms(3) == ((1.0, 1, 0),) or \
        sorted(origin_operator_terms(3)) == [(1.0, 1, 0)]
    b = default_bump()
    t = 0.3
    _, V5 = radial_origin_vV(5, b, t)
    assert V5 == pytest.approx((3 * t * b(t) + t * t * b.deriv(t, 1)) / 3, rel=1e-13)
    _, V3 = radial_origin_vV(3, b, t)
    assert V3 == pytest.approx(t * b(t), rel=1e-14)


def test_radial_origin_n7_against_nested_differentiation():
    b = default_bump()
    f = lambda s: mpm.mpf(2) ** 16 * (mpm.mpf(1) / 4 - s * s) ** 8
    g1 = lambda s: mpm.diff(lambda u: u**5 * f(u), s) / s
    Vf = lambda s: mpm.diff(g1, s) / s / 15
    t = mpm.mpf("0.4")
    v, V = radial_origin_vV(7, b, 0.4)
    assert V == pytest.approx(float(Vf(t)), rel=1e-10)
    assert v == pytest.approx(float(mpm.diff(Vf, t)), rel=1e-8)


def test_radial_origin_domain():
    with pytest.raises(DomainError):
        radial_origin_vV(4, default_bump(), 0.3)
    with pytest.raises(DomainError):
        radial_origin_vV(3, default_bump(), 0.0)
    with pytest.raises(DomainError):
        # n = 19 needs derivatives past k_max = 7
        radial_origin_vV(19, default_bump(), 0.3)


# --------------------------------------------------------------- n = 2

def test_descent_constant_datum_normalisation():
    one = FunctionProfile(lambda p: np.ones(p.shape[:-1]), lambda p: np.zeros_like(p), 0.9)
    v, V = descent2d_v_V(one, one, np.zeros(2), 0.05)
    assert V == pytest.approx(0.05, rel=1e-10)
    assert v == pytest.approx(1.0, rel=1e-10)


def test_descent_tail_persists():
    _, V = descent2d_v_V(None, default_bump(), np.zeros(2), 2.0)
    assert abs(V) > 1e-3


def test_descent_against_fd():
    b = default_bump()
    ref = _fd_radial_2d(b, 1e-3, 0.6)
    _, V = descent2d_v_V(None, b, np.zeros(2), 0.6)
    assert V == pytest.approx(ref, rel=1e-3)


# --------------------------------------------------------------- invariants

@pytest.mark.parametrize("n,x", [(1, [0.3]), (2, [0.1, 0.2]), (3, [0.2, 0.1, 0.0]),
                                 (5, np.zeros(5)), (7, np.zeros(7))])
def test_dt_V_equals_v(n, x):
    b = default_bump()
    x = np.asarray(x, dtype=float)
    h = 1e-3

    def central(t, h):
        return (propagate(b, x, [t + h], n)[1][0] - propagate(b, x, [t - h], n)[1][0]) / (2 * h)

    for t in (0.15, 0.35, 0.6):
        v, _ = propagate(b, x, [t], n)
        fd = (4 * central(t, h / 2) - central(t, h)) / 3
        assert fd == pytest.approx(v[0], rel=1e-6, abs=1e-8)


def test_V_time_derivatives_chain():
    b = default_bump()
    d = V_time_derivatives(b, np.zeros(3), 0.3, 3, 3)
    assert d[0] == pytest.approx(0.3 * b(0.3))
    assert d[1] == pytest.approx(b(0.3) + 0.3 * b.deriv(0.3, 1))
    assert d[2] == pytest.approx(2 * b.deriv(0.3, 1) + 0.3 * b.deriv(0.3, 2))


@settings(max_examples=40, deadline=None)
@given(d=st.floats(0.0, 0.9), t=st.floats(0.0, 2.5))
def test_strong_huygens_odd_n(d, t):
    b = default_bump()
    x = np.array([d, 0.0, 0.0])
    lo, hi, compact = support_breakpoints(b, x, 3)
    assert compact
    if t < lo or t > hi:
        v, V = propagate(b, x, [t], 3)
        assert abs(v[0]) <= 1e-14 and abs(V[0]) <= 1e-14


def test_domain_of_dependence():
    # data added beyond the ball |y - x| <= t must not change v(x, t)
    b = default_bump()
    extra = PolynomialBump(radius=0.3, power=8).shifted([0.0, 0.0, 0.6])
    both = FunctionProfile(lambda p: b.value(p) + extra.value(p),
                           lambda p: b.gradient(p) + extra.gradient(p), 0.95)
    x = np.zeros(3)
    for t in (0.1, 0.25):
        v_both = kirchhoff_v_V(both, None, x, t, method="quadrature")[0]
        v_alone = kirchhoff_v_V(b, None, x, t, method="quadrature")[0]
        assert abs(v_both - v_alone) <= 1e-12
    x1 = np.array([0.0])
    far = PolynomialBump(radius=0.2, power=8).shifted([0.7])
    both1 = FunctionProfile(lambda p: b.value(p) + far.value(p),
                            lambda p: b.gradient(p) + far.gradient(p), 0.95)
    assert abs(propagate(both1, x1, [0.4], 1)[0][0] - propagate(b, x1, [0.4], 1)[0][0]) <= 1e-12


def test_propagate_rejects_negative_time():
    with pytest.raises(DomainError):
        propagate(default_bump(), np.zeros(3), [-0.1], 3)
