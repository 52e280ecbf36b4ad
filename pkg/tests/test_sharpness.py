import math

import pytest

from homog_ineq import GroupModel, RadialGrid
from homog_ineq.errors import InvalidInputError
from homog_ineq.sharpness import FAMILIES, probe_sharpness


@pytest.fixture(scope="module")
def m3():
    return GroupModel.euclidean(3, 2.0, 4)


def test_stubbe_family_reaches_one(m3):
    res = probe_sharpness("stubbe", "bliss", m3, budget=40, seed=42, delta=1.0)
    assert res.best_ratio == pytest.approx(1.0, abs=0.02)
    assert res.best_ratio <= 1.0 + res.report.err_estimate
    assert 0 < res.trace_length <= 40
    assert set(res.params) == {"s0", "width"}


def test_hardy_power_window_near_one(m3):
    res = probe_sharpness("hardy", "power-window", m3, budget=60, seed=1)
    assert res.best_ratio >= 0.95
    assert res.report.status == "holds"


def test_sobolev_power_window_near_one(m3):
    res = probe_sharpness("sobolev", "power-window", m3, budget=60, seed=1)
    assert res.best_ratio >= 0.95


def test_bliss_family(m3):
    res = probe_sharpness("bliss", "bliss", m3, budget=30, seed=0)
    assert res.best_ratio == pytest.approx(1.0, abs=1e-4)


def test_hpw_gaussian_family(m3):
    res = probe_sharpness("hpw", "gaussian", m3, budget=30, seed=0)
    assert res.best_ratio == pytest.approx(1.0, abs=1e-6)


def test_quasi_norm_independence():
    a = probe_sharpness("stubbe", "bliss", GroupModel.euclidean(3, 2.0, 4), budget=40, seed=3)
    b = probe_sharpness("stubbe", "bliss", GroupModel.euclidean(3, math.inf, 4), budget=40,
                        seed=3)
    assert abs(a.best_ratio - b.best_ratio) <= 0.03 * a.best_ratio


def test_deterministic_given_seed(m3):
    grid = RadialGrid(-30.0, 30.0, 2048)
    a = probe_sharpness("stubbe", "bliss", m3, grid, budget=15, seed=9)
    b = probe_sharpness("stubbe", "bliss", m3, grid, budget=15, seed=9)
    assert a.best_ratio == b.best_ratio and a.params == b.params and a.trace == b.trace


def test_errors(m3):
    with pytest.raises(InvalidInputError):
        probe_sharpness("stubbe", "bliss", m3, budget=0)
    with pytest.raises(InvalidInputError, match="degenerate"):
        probe_sharpness("hardy", "zero", m3, budget=5)
    with pytest.raises(InvalidInputError, match="no family"):
        probe_sharpness("hardy", "bogus", m3)


def test_family_table_shape():
    for (ineq, fam), (ev, x0, lo, hi, grid) in FAMILIES.items():
        assert len(x0) == len(lo) == len(hi) and len(grid) == 3
        assert all(a <= b <= c for a, b, c in zip(lo, x0, hi))
