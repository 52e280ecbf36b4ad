"""Derivative-free search for the sharpest member of a test-function family."""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .constructors import gaussian, power_window, zero
from .errors import InvalidInputError
from .group_model import RadialGrid
from .inequalities import (BlissExtremizer, check_bliss, check_hardy, check_sobolev_type,
                           check_stubbe, stubbe_extremizer)
from .report import SharpnessResult
from .weighted_radial import check_uncertainty_hpw

__all__ = ["FAMILIES", "probe_sharpness"]


def _window_cap(grid):
    # Gaussian window must fall below ~1e-12 (squared) at both grid ends
    return 0.5 * (grid.s_max - grid.s_min) / 5.5


def _stubbe_bliss(model, grid, x, fixed):
    s0, logw = x
    f = stubbe_extremizer(model, grid, fixed.get("delta", 0.0), s0, math.exp(logw))
    return check_stubbe(f, fixed.get("delta", 0.0)), {"s0": s0, "width": math.exp(logw)}


def _centered_window(model, grid, a, eps, w):
    # r^eps tilts the window peak to s = eps w^2; shift it back to mid-grid
    mid = 0.5 * (grid.s_min + grid.s_max)
    return power_window(model, grid, a=a + eps, width=w, center=mid - eps * w * w)


def _hardy_window(model, grid, x, fixed):
    eps, logw = x
    w = min(math.exp(logw), _window_cap(grid))
    f = _centered_window(model, grid, -(model.Q - 2) / 2, abs(eps), w)
    return check_hardy(f), {"eps": abs(eps), "width": w}


def _sobolev_window(model, grid, x, fixed):
    eps, logw = x
    p = fixed.get("p", 2.0)
    w = min(math.exp(logw), _window_cap(grid))
    f = _centered_window(model, grid, -model.Q / p, abs(eps), w)
    return check_sobolev_type(f, p), {"eps": abs(eps), "width": w}


def _bliss_bliss(model, grid, x, fixed):
    lc1, lc2 = x
    p, q = fixed.get("p", 2.0), fixed.get("q", 6.0)
    ext = BlissExtremizer(math.exp(lc1), math.exp(lc2), p, q)
    return check_bliss(ext(grid.r), p, q, grid), {"c1": ext.c1, "c2": ext.c2}


def _hpw_gaussian(model, grid, x, fixed):
    (logw,) = x
    f = gaussian(model, grid, width=math.exp(logw))
    return check_uncertainty_hpw(f, fixed.get("variant", "improved")), {"width": math.exp(logw)}


def _zero(model, grid, x, fixed):
    return check_hardy(zero(model, grid)), {}


_NARROW = (-30.0, 30.0, 8192)
_WIDE = (-60.0, 60.0, 8192)

# (inequality, family) -> (evaluator, start, lower bounds, upper bounds, default grid)
FAMILIES = {
    ("stubbe", "bliss"): (_stubbe_bliss, (0.0, 0.3), (-5.0, -2.0), (5.0, 2.0), _NARROW),
    ("hardy", "power-window"): (_hardy_window, (0.1, 1.5), (-0.5, -1.0), (0.5, 4.0), _WIDE),
    ("sobolev", "power-window"): (_sobolev_window, (0.1, 1.5), (-0.5, -1.0), (0.5, 4.0), _WIDE),
    ("bliss", "bliss"): (_bliss_bliss, (0.5, 0.5), (-3.0, -3.0), (3.0, 3.0), (-12.0, 8.0, 4096)),
    ("hpw", "gaussian"): (_hpw_gaussian, (0.0,), (-3.0,), (3.0,), (-12.0, 8.0, 4096)),
    ("hardy", "zero"): (_zero, (0.0,), (-1.0,), (1.0,), (-12.0, 8.0, 4096)),
}


def probe_sharpness(ineq, family, model, grid=None, budget=200, seed=0, **fixed):
    """Maximize the tightness of ``ineq`` over a parameterized family.

    Tightness is ``lhs/rhs`` for upper bounds and ``rhs/lhs`` for lower
    bounds, so 1 means equality. Nelder-Mead (bounded scalar search for
    one-parameter families) runs from a seeded perturbation of the family's
    default start, with ``budget`` evaluations at most. Without ``grid`` the
    family's default grid is used.
    """
    if budget < 1:
        raise InvalidInputError("optimizer budget must be positive")
    try:
        evaluate, x0, lo, hi, default_grid = FAMILIES[(ineq, family)]
    except KeyError:
        raise InvalidInputError(f"no family {family!r} for {ineq!r}; known: "
                                f"{sorted(FAMILIES)}") from None
    grid = grid or RadialGrid(*default_grid)
    lo, hi = np.asarray(lo), np.asarray(hi)
    rng = np.random.default_rng(seed)
    start = np.clip(np.asarray(x0) + rng.normal(scale=0.1, size=len(x0)), lo, hi)
    trace = []
    best = {"t": -math.inf, "params": None, "report": None}

    def objective(x):
        x = np.clip(x, lo, hi)
        rep, params = evaluate(model, grid, tuple(float(v) for v in x), fixed)
        if rep.status == "degenerate":
            raise InvalidInputError(f"family {family!r} produced a degenerate field")
        t = rep.tightness
        trace.append((tuple(float(v) for v in x), float(t)))
        if math.isfinite(t) and t > best["t"]:
            best.update(t=t, params=params, report=rep)
        return -t if math.isfinite(t) else math.inf

    if len(x0) == 1:
        minimize_scalar(lambda v: objective(np.array([v])), bounds=(lo[0], hi[0]),
                        method="bounded", options={"maxiter": budget, "xatol": 1e-6})
    else:
        minimize(objective, start, method="Nelder-Mead",
                 options={"maxfev": budget, "xatol": 1e-6, "fatol": 1e-12})
    return SharpnessResult(float(best["t"]), best["params"], len(trace), trace, best["report"])
