import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import bump_s, flat_top
from homog_ineq import (Field, GroupModel, RadialGrid, euler_adjoint_apply, euler_apply,
                        inner_product, lp_norm, radial_derivative_apply, radialize, sphere_mean)
from homog_ineq.constructors import random_smooth
from homog_ineq.errors import InvalidInputError, TruncationError
from homog_ineq.field import ds_apply, signed_power

LO, HI = -6.0, 4.0


def interior(grid, pad=2.0):
    return (grid.s > LO + pad) & (grid.s < HI - pad)


def windowed(model, grid, prof):
    return Field.radial_from_s(model, grid, lambda s: prof(s) * flat_top(s, LO, HI, 0.15))


# ---------------------------------------------------------------- basics

def test_field_shape_and_finiteness(model3, small_grid):
    with pytest.raises(InvalidInputError):
        Field(model3, small_grid, np.zeros((small_grid.N, 2)))
    with pytest.raises(InvalidInputError):
        Field(model3, small_grid, np.full(small_grid.N, np.nan))
    f = Field(model3, small_grid, np.ones(small_grid.N))
    assert f.is_radial and f.values.shape == (small_grid.N, model3.n_nodes)
    with pytest.raises(ValueError):
        f.values[0, 0] = 2.0


def test_boundary_decay_flag(model3, small_grid):
    f = Field.radial(model3, small_grid, lambda r: np.exp(-r * r))
    lo, hi = f.boundary_values
    assert lo == pytest.approx(1.0, rel=1e-6) and hi == 0.0


# ---------------------------------------------------------- Euler operator

@pytest.mark.parametrize("a", [-1.5, -0.5, 0.5, 2.0])
def test_euler_on_power(model3, grid, a):
    f = windowed(model3, grid, lambda s: np.exp(a * s))
    ef = euler_apply(f)
    m = interior(grid)
    np.testing.assert_allclose(ef.values[m], a * f.values[m], rtol=1e-8)


def test_euler_on_constant_window(model3, grid):
    f = windowed(model3, grid, lambda s: np.ones_like(s))
    ef = euler_apply(f)
    assert np.max(np.abs(ef.values[interior(grid)])) < 1e-8


def test_euler_on_log_oscillation(model3, grid):
    tau = 2.0
    f = windowed(model3, grid, lambda s: np.sin(tau * s))
    ef = euler_apply(f)
    m = interior(grid)
    np.testing.assert_allclose(ef.values[m, 0], tau * np.cos(tau * grid.s[m]), atol=1e-8)


def test_radial_derivative_examples(model3, grid):
    m = interior(grid)
    f = windowed(model3, grid, np.exp)
    np.testing.assert_allclose(radial_derivative_apply(f).values[m], 1.0, rtol=1e-8)
    f2 = windowed(model3, grid, lambda s: np.exp(2 * s))
    np.testing.assert_allclose(radial_derivative_apply(f2).values[m, 0], 2 * grid.r[m], rtol=1e-8)


def test_radial_derivative_is_scaled_euler(model3, grid):
    f = random_smooth(model3, grid, np.random.default_rng(0))
    rf, ef = radial_derivative_apply(f), euler_apply(f)
    assert np.array_equal(rf.values, ef.values * np.exp(-grid.s)[:, None])


def test_adjoint_definition_and_zero(model3, small_grid):
    f = random_smooth(model3, small_grid, np.random.default_rng(1))
    es = euler_adjoint_apply(f)
    np.testing.assert_allclose(es.values + model3.Q * f.values + euler_apply(f).values, 0,
                               atol=1e-12 * np.abs(f.values).max() * 1e3)
    z = Field(model3, small_grid, np.zeros(small_grid.N))
    assert not np.any(euler_adjoint_apply(z).values)


@pytest.mark.parametrize("seed", range(5))
def test_adjoint_pairing(model3, grid, seed):
    rng = np.random.default_rng(seed)
    f = random_smooth(model3, grid, rng, complex_=True)
    g = random_smooth(model3, grid, rng, complex_=True)
    lhs = inner_product(euler_apply(f), g)
    rhs = inner_product(f, euler_adjoint_apply(g))
    assert abs(lhs - rhs) <= 1e-6 * abs(lhs)


def test_euler_star_euler_on_critical_power(model3, grid):
    Q = model3.Q
    f = windowed(model3, grid, lambda s: np.exp(-Q / 2 * s))
    out = euler_adjoint_apply(euler_apply(f))
    m = interior(grid)
    np.testing.assert_allclose(out.values[m], Q * Q / 4 * f.values[m], rtol=1e-6)


def test_schemes_agree(model3, grid):
    f = Field.from_function(model3, grid, lambda r, y: np.exp(-np.log(r) ** 2 / 2) * (1 + 0.3 * y[:, 0]))
    a, used_a = ds_apply(f.values, grid.h, "spectral")
    b, used_b = ds_apply(f.values, grid.h, "fd4")
    assert (used_a, used_b) == ("spectral", "fd4")
    assert np.max(np.abs(a - b)) <= 1e-5 * np.max(np.abs(a))


def test_spectral_requires_decay(model3, grid):
    f = Field.radial(model3, grid, lambda r: 1.0 / (1 + r))
    with pytest.raises(TruncationError) as e:
        euler_apply(f, "spectral")
    assert e.value.magnitude > 1e-10
    assert euler_apply(f).meta["scheme"] == "fd4"
    with pytest.raises(InvalidInputError):
        euler_apply(f, "bogus")


def test_hybrid_tail_accuracy():
    # |R f|^2 carries e^s; the derivative must stay accurate far in the tail
    m = GroupModel.euclidean(3, 2.0, 4)
    g = RadialGrid(-60.0, 60.0, 8192)
    w = 5.0
    f = Field.radial_from_s(m, g, lambda s: np.exp(-0.5 * s - s * s / (2 * w * w)))
    rf2 = lp_norm(radial_derivative_apply(f), 2) ** 2
    exact = m.sphere_measure * (math.sqrt(math.pi) / (2 * w) + 0.25 * w * math.sqrt(math.pi))
    assert rf2 == pytest.approx(exact, rel=1e-10)


# ------------------------------------------------------------------ norms

def test_lp_norm_gaussian(model3, grid):
    f = Field.radial(model3, grid, lambda r: np.exp(-r * r / 2))
    assert lp_norm(f, 2) == pytest.approx(math.pi ** 0.75, rel=1e-6)
    assert lp_norm(Field(model3, grid, np.zeros(grid.N)), 2) == 0.0
    with pytest.raises(InvalidInputError):
        lp_norm(f, 0.5)


@given(st.floats(0.3, 3.0), st.sampled_from([1.0, 1.5, 2.0, 4.0]))
def test_lp_norm_scaling(lam, p):
    m = GroupModel.euclidean(3, 2.0, 4)
    g = RadialGrid(-14.0, 6.0, 4096)
    prof = lambda r: np.exp(-r * r) * (1 + r)
    f = Field.radial(m, g, prof)
    fl = Field.radial(m, g, lambda r: prof(lam * r))
    assert lp_norm(fl, p) == pytest.approx(lam ** (-m.Q / p) * lp_norm(f, p), rel=1e-8)


# ---------------------------------------------------- radialization, means

def test_radialize_radial_nonnegative(model3, small_grid):
    f = Field.radial(model3, small_grid, lambda r: np.exp(-r))
    for p in (1.0, 2.0, 3.0):
        np.testing.assert_allclose(radialize(f, p).values, f.values, rtol=1e-14, atol=1e-300)


def test_radialize_two_values():
    m = GroupModel.euclidean(1, 2.0)
    g = RadialGrid(-2.0, 2.0, 32)
    a, b = 3.0, -4.0
    f = Field(m, g, np.tile([a, b], (g.N, 1)))
    np.testing.assert_allclose(radialize(f, 2).profile, math.sqrt((a * a + b * b) / 2))
    with pytest.raises(InvalidInputError):
        radialize(f, 0.5)


@given(st.integers(0, 10_000), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_radialize_preserves_lp(seed, p):
    m = GroupModel.euclidean(3, 2.0, 4)
    g = RadialGrid(-8.0, 4.0, 512)
    f = random_smooth(m, g, np.random.default_rng(seed))
    assert lp_norm(radialize(f, p), p) == pytest.approx(lp_norm(f, p), rel=1e-10)


def test_sphere_mean_examples(model2, small_grid):
    f = Field.radial(model2, small_grid, lambda r: np.exp(-r))
    np.testing.assert_allclose(sphere_mean(f).values, f.values, rtol=1e-14)
    odd = Field.from_function(model2, small_grid, lambda r, y: np.exp(-r) * y[:, 0])
    assert np.max(np.abs(sphere_mean(odd).values)) < 1e-14


@given(st.integers(0, 10_000))
def test_sphere_mean_below_l1_mean(seed):
    m = GroupModel.euclidean(2, 2.0, 16)
    g = RadialGrid(-8.0, 4.0, 256)
    f = random_smooth(m, g, np.random.default_rng(seed))
    assert np.all(np.abs(sphere_mean(f).values) <= radialize(f, 1).values + 1e-14)


def test_signed_power():
    v = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_allclose(signed_power(v, 1.5), [-math.sqrt(2), 0.0, math.sqrt(3)])


def test_field_arithmetic_and_coarsen(model3, small_grid):
    f = Field.radial(model3, small_grid, lambda r: np.exp(-r))
    g = 2 * f + f - f / 2
    np.testing.assert_allclose(g.values, 2.5 * f.values)
    c = f.coarsen()
    assert c.grid.N == (small_grid.N + 1) // 2
    np.testing.assert_array_equal(c.values, f.values[::2])
