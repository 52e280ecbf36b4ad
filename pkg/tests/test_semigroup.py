import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import bump_s, flat_top
from homog_ineq import Field, GroupModel, RadialGrid, inner_product, lp_norm
from homog_ineq.constructors import random_smooth
from homog_ineq.errors import InvalidInputError, TruncationError
from homog_ineq.semigroup import (TimeGrid, besov_norm, dilate, euler_heat_kernel,
                                  euler_heat_spectral, from_line, generator_apply, line_heat,
                                  mellin, to_line)


@pytest.fixture(scope="module")
def m3():
    return GroupModel.euclidean(3, 2.0, 4)


@pytest.fixture(scope="module")
def g():
    return RadialGrid(-12.0, 8.0, 2048)


def centered(model, grid, seed, **kw):
    return random_smooth(model, grid, np.random.default_rng(seed), span=(-4.0, 0.0), **kw)


def line_gauss(model, grid, c=-2.0, w=1.0, angular=False):
    Q = model.Q
    if angular:
        return Field.from_function(
            model, grid, lambda r, y: r ** (-Q / 2) * np.exp(-(np.log(r) - c) ** 2 / (2 * w * w))
            * (1 + 0.5 * y[:, 0]))
    return Field.radial_from_s(model, grid,
                               lambda s: np.exp(-Q * s / 2 - (s - c) ** 2 / (2 * w * w)))


# ----------------------------------------------------------------- F map

def test_line_map_of_critical_power(m3, g):
    f = Field.radial_from_s(m3, g, lambda s: np.exp(-1.5 * s) * flat_top(s, -8, 4, 0.1))
    line = to_line(f).values[:, 0]
    inner = (g.s > -6) & (g.s < 2)
    np.testing.assert_allclose(line[inner], 1.0, atol=1e-12)


def test_line_round_trip_and_isometry(m3, g):
    f = centered(m3, g, 0)
    back = from_line(to_line(f))
    np.testing.assert_allclose(back.values, f.values, rtol=1e-14, atol=0)
    assert to_line(f).lp_norm(2) == pytest.approx(lp_norm(f, 2), rel=1e-10)


# -------------------------------------------------------------- dilation

def test_dilate_identity_and_group_law(m3, g):
    f = centered(m3, g, 1)
    np.testing.assert_array_equal(dilate(f, 0.0).values, f.values)
    a, b = 7 * g.h, -3 * g.h
    np.testing.assert_allclose(dilate(dilate(f, a), b).values, dilate(f, a + b).values,
                               rtol=1e-10, atol=1e-14)
    assert dilate(f, a).meta["interpolation"] == "none"


@pytest.mark.parametrize("t", [0.3, -1.234])
def test_dilate_unitary_and_exact(m3, g, t):
    f = line_gauss(m3, g)
    u = dilate(f, t)
    assert lp_norm(u, 2) == pytest.approx(lp_norm(f, 2), rel=1e-10)
    # F U(t) f (s) = F f (s + t): the line Gaussian moves to c - t
    np.testing.assert_allclose(to_line(u).values, to_line(line_gauss(m3, g, c=-2.0 - t)).values,
                               atol=1e-10)
    assert u.meta["interpolation"] == "fourier"


def test_dilate_noninteger_requires_decay(m3, g):
    f = Field.radial(m3, g, lambda r: np.ones_like(r))
    with pytest.raises(TruncationError):
        dilate(f, 0.1234)


# ---------------------------------------------------------------- Mellin

def test_mellin_gaussian_pair(m3, g):
    w, c = 0.8, -2.0
    spec = mellin(line_gauss(m3, g, c, w))
    exact = w * np.exp(-0.5 * (w * spec.tau) ** 2 - 1j * c * spec.tau)
    np.testing.assert_allclose(spec.values[:, 0], exact, atol=1e-8)


def test_mellin_parseval(m3, g):
    f = centered(m3, g, 2)
    assert mellin(f).l2_norm() == pytest.approx(to_line(f).lp_norm(2), rel=1e-10)


def test_mellin_generator_diagonal(m3, g):
    f = line_gauss(m3, g, angular=True)
    lhs = mellin(generator_apply(f)).values
    sp = mellin(f)
    rhs = sp.tau[:, None] * sp.values
    assert np.max(np.abs(lhs - rhs)) <= 1e-6 * np.max(np.abs(rhs))


def test_mellin_requires_decay(m3, g):
    with pytest.raises(TruncationError):
        mellin(Field.radial(m3, g, lambda r: 1 / (1 + r)))


# ------------------------------------------------------------ heat routes

@pytest.mark.parametrize("route", [euler_heat_kernel, euler_heat_spectral])
def test_heat_on_constant_line(m3, route):
    g = RadialGrid(-30.0, 30.0, 4096)
    Q = m3.Q
    f = Field.radial_from_s(m3, g, lambda s: np.exp(-Q * s / 2) * flat_top(s, -20, 20))
    t = 0.5
    out = route(f, t)
    inner = (g.s > -10) & (g.s < 10)
    np.testing.assert_allclose(out.values[inner], math.exp(-t * Q * Q / 4) * f.values[inner],
                               rtol=1e-6)


def test_heat_small_time_identity(m3, g):
    f = centered(m3, g, 3)
    out = euler_heat_kernel(f, 1e-6)
    assert lp_norm(out - f, 2) <= 1e-4 * lp_norm(f, 2)


def test_heat_mellin_eigenline(m3):
    g = RadialGrid(-30.0, 26.0, 4096)
    tau0, t = 3.0, 0.2
    f = Field.radial_from_s(m3, g, lambda s: np.exp(-1.5 * s - (s + 2) ** 2 / 4) * np.cos(tau0 * s))
    before, after = mellin(f), mellin(euler_heat_kernel(f, t))
    mult = np.exp(-t * (before.tau ** 2 + m3.Q ** 2 / 4))
    big = np.abs(before.values[:, 0]) > 1e-8 * np.abs(before.values).max()
    err = np.abs(after.values[big, 0] - mult[big] * before.values[big, 0])
    assert err.max() <= 1e-5 * np.abs(before.values).max()


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0])
def test_routes_agree(m3, g, t):
    f = centered(m3, g, 4)
    a, b = euler_heat_kernel(f, t), euler_heat_spectral(f, t)
    assert lp_norm(a - b, 2) <= 1e-6 * lp_norm(a, 2)


def test_semigroup_law(m3, g):
    f = centered(m3, g, 5)
    for t, s in [(0.05, 0.2), (0.2, 0.2)]:
        lhs = euler_heat_spectral(euler_heat_spectral(f, s), t)
        assert lp_norm(lhs - euler_heat_spectral(f, t + s), 2) <= 1e-8 * lp_norm(f, 2)


@pytest.mark.parametrize("t", [0.05, 0.1, 0.3, 1.0, 2.0])
def test_spectral_diagonalization(m3, t):
    g = RadialGrid(-30.0, 26.0, 4096)
    f = line_gauss(m3, g, angular=True)
    before, after = mellin(f), mellin(euler_heat_spectral(f, t))
    mult = np.exp(-t * (before.tau ** 2 + m3.Q ** 2 / 4))[:, None]
    assert np.max(np.abs(after.values - mult * before.values)) <= 1e-6 * np.abs(before.values).max()


@given(st.integers(0, 1000), st.floats(0.01, 1.0))
def test_self_adjoint(seed, t):
    m = GroupModel.euclidean(3, 2.0, 4)
    g = RadialGrid(-12.0, 8.0, 1024)
    f, h = centered(m, g, seed), centered(m, g, seed + 1)
    lhs = inner_product(euler_heat_spectral(f, t), h)
    rhs = inner_product(f, euler_heat_spectral(h, t))
    assert abs(lhs - rhs) <= 1e-8 * lp_norm(f, 2) * lp_norm(h, 2)


@given(st.integers(0, 1000), st.floats(0.01, 1.0))
def test_positivity_and_contraction(seed, t):
    m = GroupModel.euclidean(3, 2.0, 4)
    g = RadialGrid(-12.0, 8.0, 1024)
    f = Field(m, g, np.abs(centered(m, g, seed).values))
    out = euler_heat_kernel(f, t)
    assert out.values.min() >= -1e-12 * f.values.max()
    assert lp_norm(out, 2) <= lp_norm(f, 2) * (1 + 1e-10)


def test_heat_rejects_bad_time(m3, g):
    f = centered(m3, g, 6)
    for t in (0.0, -1.0, math.inf):
        with pytest.raises(InvalidInputError):
            euler_heat_kernel(f, t)
        with pytest.raises(InvalidInputError):
            euler_heat_spectral(f, t)


def test_kernel_reports_lost_mass(m3, g):
    f = Field.radial_from_s(m3, g, lambda s: np.exp(-1.5 * s) * flat_top(s, -20, 4))
    with pytest.warns(Warning):
        out = euler_heat_kernel(f, 0.5)
    assert out.meta["lost_mass"] > 1e-3


# ----------------------------------------------------------------- Besov

def test_time_grid():
    tg = TimeGrid()
    assert tg.times.size == 161
    assert tg.times[0] == pytest.approx(1e-4) and tg.times[-1] == pytest.approx(1e4)
    for bad in ({"t_min": 0.0}, {"ratio": 1.0}, {"J": -1}):
        with pytest.raises(InvalidInputError):
            TimeGrid(**bad)


def test_besov_zero_and_validation(m3, g):
    z = Field(m3, g, np.zeros(g.N))
    assert besov_norm(z, -1.0).value == 0.0
    with pytest.raises(InvalidInputError):
        besov_norm(z, 0.5)
    with pytest.raises(InvalidInputError):
        besov_norm(z, -1.0, [])


def test_besov_bump_interior_and_stable(m3, g):
    f = Field.radial_from_s(m3, g, lambda s: np.exp(-1.5 * s) * bump_s(s, -2.0, 1.0))
    # t^(-alpha/2) sup ~ t^(-(1+alpha)/2) at large t: interior max needs -1 < alpha < 0
    b = besov_norm(f, -0.5)
    fine = besov_norm(f, -0.5, TimeGrid().refine(10))
    assert math.isfinite(b.value) and not b.at_endpoint
    assert b.value == pytest.approx(fine.value, rel=0.01)


def test_besov_shift_invariant(m3, g):
    f = Field.radial_from_s(m3, g, lambda s: np.exp(-1.5 * s) * bump_s(s, -2.0, 1.0))
    b0 = besov_norm(f, -0.5).value
    b1 = besov_norm(dilate(f, 40 * g.h), -0.5).value
    assert b1 == pytest.approx(b0, rel=1e-10)


def test_line_heat_is_linear_convolution(m3, g):
    f = line_gauss(m3, g, w=0.5)
    t = 0.3
    out = line_heat(to_line(f), t).values[:, 0]
    w2 = 0.25 + 2 * t
    exact = math.sqrt(0.25 / w2) * np.exp(-(g.s + 2) ** 2 / (2 * w2))
    np.testing.assert_allclose(out, exact, atol=1e-10)
