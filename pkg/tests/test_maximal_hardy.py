import math

import numpy as np
import pytest
from scipy.integrate import quad
from hypothesis import given, strategies as st

from homog_ineq import Field, GroupModel, RadialGrid, integral
from homog_ineq.constructors import gaussian, positive_corpus
from homog_ineq.errors import InvalidInputError, PreconditionError
from homog_ineq.maximal_hardy import (RadialWeightPair, a_functional, ball_mean,
                                      check_max_hardy, geometric_mean_transform,
                                      necessity_probe, witness, witness_integral,
                                      witness_log_mean)


@pytest.fixture(scope="module")
def m3():
    return GroupModel.euclidean(3, 2.0, 4)


@pytest.fixture(scope="module")
def g():
    return RadialGrid(-12.0, 8.0, 4096)


def const(m, g, c=1.0):
    return Field(m, g, np.full(g.N, float(c)))


def power(m, g, a):
    return Field.radial_from_s(m, g, lambda s: np.exp(a * s))


def inner(g, lo=-8.0, hi=5.0):
    return (g.s > lo) & (g.s < hi)


# ---------------------------------------------------------------- ball mean

def test_ball_mean_constant(m3, g):
    np.testing.assert_allclose(ball_mean(const(m3, g, 2.5)).values, 2.5, rtol=1e-8)


@pytest.mark.parametrize("a", [-2.0, -0.5, 1.0, 2.0])
def test_ball_mean_power(m3, g, a):
    mf = ball_mean(power(m3, g, a))
    expect = m3.Q / (m3.Q + a) * np.exp(a * g.s)
    np.testing.assert_allclose(mf.values[inner(g), 0], expect[inner(g)], rtol=1e-6)


def test_ball_mean_monotone(m3, g):
    f = gaussian(m3, g)
    h = f + const(m3, g, 0.1)
    assert np.all(ball_mean(f).values >= 0)
    assert np.all(ball_mean(h).values >= ball_mean(f).values)


# -------------------------------------------------------- geometric mean

def test_geometric_mean_constant_and_power(m3, g):
    np.testing.assert_allclose(geometric_mean_transform(const(m3, g, 3.0)).values, 3.0,
                               rtol=1e-8)
    a = 1.5
    out = geometric_mean_transform(power(m3, g, a)).values[:, 0]
    expect = math.exp(-a / m3.Q) * np.exp(a * g.s)
    np.testing.assert_allclose(out[inner(g)], expect[inner(g)], rtol=1e-6)


def test_geometric_mean_rejects_nonpositive(m3, g):
    v = np.ones(g.N)
    v[100] = 0.0
    with pytest.raises(InvalidInputError, match="s="):
        geometric_mean_transform(Field(m3, g, v))
    with pytest.raises(InvalidInputError, match="underflow"):
        geometric_mean_transform(Field(m3, g, np.full(g.N, 1e-310)))


@given(st.integers(0, 1000))
def test_geometric_mean_multiplicative_and_am_gm(seed):
    m = GroupModel.euclidean(3, 2.0, 4)
    grid = RadialGrid(-10.0, 6.0, 1024)
    f, h = positive_corpus(m, grid, 2, seed)
    gf, gh = geometric_mean_transform(f), geometric_mean_transform(h)
    np.testing.assert_allclose(geometric_mean_transform(f * h).values, gf.values * gh.values,
                               rtol=1e-10)
    assert np.all(gf.values <= ball_mean(f).values * (1 + 1e-12))


# ------------------------------------------------------------- A functional

def test_a_functional_unit_weights(m3, g):
    a = a_functional(RadialWeightPair(const(m3, g), const(m3, g)))
    assert a.A == pytest.approx(4 * math.pi / 3, rel=1e-8)
    assert a.r_independent and not a.divergent


def test_a_functional_scales_with_psi(m3, g):
    base = a_functional(RadialWeightPair(const(m3, g), gaussian(m3, g, 3.0) + const(m3, g, 1.0)))
    scaled = a_functional(RadialWeightPair(const(m3, g),
                                           (gaussian(m3, g, 3.0) + const(m3, g, 1.0)) * 4.0))
    assert scaled.A == pytest.approx(base.A / 4.0, rel=1e-7)


def test_a_functional_divergent(m3, g):
    phi = Field.radial(m3, g, lambda r: 1 + r ** 3)
    a = a_functional(RadialWeightPair(phi, const(m3, g)))
    assert a.divergent and a.A == math.inf
    with pytest.raises(PreconditionError):
        check_max_hardy(RadialWeightPair(phi, const(m3, g)), gaussian(m3, g))


def test_weight_pair_validation(m3, g):
    with pytest.raises(InvalidInputError):
        RadialWeightPair(const(m3, g, -1.0), const(m3, g))
    other = RadialGrid(-6.0, 6.0, 512)
    with pytest.raises(InvalidInputError):
        RadialWeightPair(const(m3, g), const(m3, other))


# ---------------------------------------------------------------- inequality

def test_max_hardy_unit_weights_gaussian(m3):
    g = RadialGrid(-12.0, 3.0, 4096)  # exp(-r^2) stays above 1e-300
    rep = check_max_hardy(RadialWeightPair(const(m3, g), const(m3, g)), gaussian(m3, g))
    assert rep.constant == pytest.approx(math.e, rel=1e-8)
    assert rep.status == "holds"


def test_max_hardy_constant_f(m3, g):
    decay = Field.radial(m3, g, lambda r: 1 / (1 + r ** 5))
    pair = RadialWeightPair(decay, decay * 2.0)
    reps = [check_max_hardy(pair, const(m3, g, c)) for c in (0.7, 3.0)]
    expect = integral(pair.phi) / (reps[0].constant * integral(pair.psi))
    for rep in reps:
        assert rep.status == "holds"
        assert rep.ratio == pytest.approx(expect, rel=1e-8)


def test_max_hardy_positive_corpus(m3, g):
    pair = RadialWeightPair(const(m3, g), const(m3, g))
    for f in positive_corpus(m3, g, 50, seed=11):
        rep = check_max_hardy(pair, f)
        assert rep.status == "holds", rep


def test_max_hardy_phi_scaling_ratio_invariant(m3, g):
    psi = const(m3, g)
    phi = const(m3, g)
    f = positive_corpus(m3, g, 1, seed=2)[0]
    a = check_max_hardy(RadialWeightPair(phi, psi), f)
    b = check_max_hardy(RadialWeightPair(phi * 3.0, psi), f)
    assert b.ratio == pytest.approx(a.ratio, rel=1e-12)


# ------------------------------------------------------------------ witness

def test_witness_integral_closed_form(m3, g):
    Q = m3.Q
    expect = m3.sphere_measure * (1 / Q + math.exp(-2 * Q) / Q)
    assert witness_integral(m3, g, 1.0) == pytest.approx(expect, rel=1e-8)
    with pytest.raises(InvalidInputError):
        witness(m3, g, 0.0)


@pytest.mark.parametrize("R", [0.5, 1.0, 3.0])
def test_witness_log_mean_matches_quad(m3, g, R):
    # u jumps by e^(-2Q) at R, so the oracle splits the radial integral there
    Q = m3.Q

    def log_u(rho):
        return -Q * math.log(R) if rho < R else -2 * Q - 2 * Q * math.log(rho) + Q * math.log(R)

    def oracle(r):
        pieces = [(0.0, min(r, R))] + ([(R, r)] if r > R else [])
        tot = sum(quad(lambda x: log_u(x) * x ** (Q - 1), a, b, epsabs=0, epsrel=1e-13)[0]
                  for a, b in pieces)
        return Q * tot / r ** Q

    exact = witness_log_mean(m3, g, R)
    for s in (-3.0, math.log(R) - 0.01, math.log(R) + 0.01, 1.5, 4.0):
        j = g.index_of(s)
        assert exact.values[j, 0] == pytest.approx(oracle(g.r[j]), rel=1e-10, abs=1e-12)


def test_necessity_unit_weights(m3, g):
    pair = RadialWeightPair(const(m3, g), const(m3, g))
    pts = necessity_probe(pair, [0.3, 1.0, 4.0])
    Q = m3.Q
    assert pts[1].lower_bound == pytest.approx(math.exp(2 - 2 * Q) * 4 * math.pi / 3, rel=1e-8)
    assert all(p.consistent and math.isfinite(p.lhs) for p in pts)
    doubled = necessity_probe(RadialWeightPair(const(m3, g, 2.0), const(m3, g)), [1.0])[0]
    assert doubled.lhs == pytest.approx(2 * pts[1].lhs, rel=1e-12)
    assert doubled.lower_bound == pytest.approx(2 * pts[1].lower_bound, rel=1e-12)


def test_necessity_divergent_grows(m3, g):
    phi = Field.radial(m3, g, lambda r: 1 + r ** 3)
    pts = necessity_probe(RadialWeightPair(phi, const(m3, g)), [1.0, 10.0, 100.0])
    req = [p.required_constant for p in pts]
    assert req[0] < req[1] < req[2]
    assert all(p.consistent for p in pts)
