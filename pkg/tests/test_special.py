import math

import pytest
from hypothesis import given, strategies as st

from homog_ineq.special import gamma, log_gamma


@pytest.mark.parametrize("x, exact", [
    (0.5, math.sqrt(math.pi)),
    (1.5, math.sqrt(math.pi) / 2),
    (2.5, 3 * math.sqrt(math.pi) / 4),
    (3.5, 15 * math.sqrt(math.pi) / 8),
    (1.0, 1.0),
    (5.0, 24.0),
])
def test_gamma_closed_forms(x, exact):
    assert abs(gamma(x) - exact) <= 1e-12 * exact


@given(st.floats(0.05, 40.0))
def test_gamma_matches_stdlib(x):
    assert gamma(x) == pytest.approx(math.gamma(x), rel=1e-13)


@given(st.floats(0.05, 150.0))
def test_log_gamma_matches_stdlib(x):
    assert log_gamma(x) == pytest.approx(math.lgamma(x), rel=1e-12, abs=1e-13)


def test_gamma_poles_and_reflection():
    assert math.isinf(gamma(0.0)) and math.isinf(gamma(-2.0))
    assert gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi), rel=1e-13)


def test_gamma_vectorized():
    out = gamma([0.5, 1.5])
    assert out.shape == (2,)
    with pytest.raises(ValueError):
        log_gamma(0.0)
