"""Geometric-mean (maximal) Hardy inequality with radial weights.

``int phi exp(M log f) <= C int psi f`` for all positive ``f`` holds iff

    A = sup_R R^Q int_{|x| >= R} phi exp(M log(1/psi)) / |x|^(2Q) dx < inf,

where ``M`` is the ball mean. The sufficiency constant used here is
``C = e A Q / |sphere|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import InvalidInputError, PreconditionError
from .field import Field, integral
from .report import make_report

__all__ = [
    "RadialWeightPair",
    "AFunctional",
    "NecessityPoint",
    "ball_mean",
    "geometric_mean_transform",
    "a_functional",
    "check_max_hardy",
    "witness",
    "witness_log_mean",
    "witness_integral",
    "necessity_probe",
]

UNDERFLOW = 1e-300
DIVERGENCE_RATE = -1e-3


@dataclass(frozen=True, eq=False)
class RadialWeightPair:
    """Positive radial weights ``phi`` and ``psi``."""

    phi: Field
    psi: Field

    def __post_init__(self):
        for name, w in (("phi", self.phi), ("psi", self.psi)):
            if w.is_complex or not w.is_radial:
                raise InvalidInputError(f"weight {name} must be a real radial field")
            _check_positive(w, name)
        if self.phi.grid != self.psi.grid or self.phi.model is not self.psi.model:
            raise InvalidInputError("weights live on different grids or models")

    @property
    def min_values(self):
        return float(self.phi.values.min()), float(self.psi.values.min())

    def coarsen(self):
        return RadialWeightPair(self.phi.coarsen(), self.psi.coarsen())


def _check_positive(f, name="f"):
    v = f.values
    if f.is_complex:
        raise InvalidInputError(f"{name} must be real")
    bad = v <= 0
    if np.any(bad):
        j, i = np.argwhere(bad)[0]
        raise InvalidInputError(f"{name} is not positive at s={f.grid.s[j]:.6g}, node {i}")
    low = v < UNDERFLOW
    if np.any(low):
        j, i = np.argwhere(low)[0]
        raise InvalidInputError(
            f"{name} underflows below {UNDERFLOW:g} at s={f.grid.s[j]:.6g}, node {i}")


def _head(vals, s0, h, Q, model="auto"):
    """``int_{-inf}^{s0} v(s) e^(Qs) ds`` from the first three samples.

    Both a linear and an exponential continuation of ``v`` are fitted to the
    first two samples; with ``model="auto"`` the one that better predicts the
    third is used. ``model="linear"`` keeps the operator exactly linear.
    """
    f0, f1, f2 = vals[0], vals[1], vals[2]
    m = (f1 - f0) / h
    lin = (abs(f0 + 2 * m * h - f2), math.exp(s0 * Q) * (f0 / Q - m / Q ** 2), "linear")
    best = lin
    if model == "linear":
        return best[1], best[2]
    if f0 != 0 and f1 != 0 and np.sign(f0) == np.sign(f1):
        lam = math.log(f1 / f0) / h
        if Q + lam > 0:
            ex = (abs(f0 * math.exp(2 * lam * h) - f2), f0 * math.exp(s0 * Q) / (Q + lam),
                  "exponential")
            if ex[0] < lin[0]:
                best = ex
    return best[1], best[2]


def _prefix(values, grid, Q, head="auto"):
    """``int_{-inf}^{s} v e^(Q s') ds'`` per column, plus the head models used."""
    y = values * np.exp(Q * grid.s)[:, None]
    cum = cumulative_simpson(y, dx=grid.h, axis=0, initial=0.0)
    heads = [_head(values[:, i], grid.s_min, grid.h, Q, head) for i in range(values.shape[1])]
    cum = cum + np.array([hv for hv, _ in heads])[None, :]
    return cum, sorted({m for _, m in heads})


def ball_mean(f, head="auto"):
    """Ball mean ``(M f)(r) = |B(0, r)|^-1 int_{B(0, r)} f``, a radial Field.

    Radii below the first grid sample are covered by a linear or exponential
    continuation of ``f`` in ``s`` (recorded in ``meta["head_model"]``);
    ``head`` is ``"auto"`` (better predictor of the third sample) or
    ``"linear"``.
    """
    if head not in ("auto", "linear"):
        raise InvalidInputError(f"unknown head model {head!r}")
    Q, w = f.model.Q, f.model.weights
    cum, models = _prefix(np.asarray(f.values), f.grid, Q, head)
    mean = Q * np.exp(-Q * f.grid.s) * (cum @ w) / w.sum()
    return Field(f.model, f.grid, mean, {"ball_mean": True, "head_model": models})


def geometric_mean_transform(f):
    """``exp(M log f)`` for a strictly positive real field.

    ``log f`` is continued linearly in ``s`` below the grid (power-law ``f``),
    which keeps the transform exactly multiplicative.
    """
    _check_positive(f)
    lm = ball_mean(f.with_values(np.log(f.values)), head="linear")
    return lm.with_values(np.exp(lm.values), geometric_mean=True)


@dataclass
class AFunctional:
    A: float
    argmax_R: float
    at_endpoint: bool
    r_independent: bool
    divergent: bool
    values: np.ndarray = field(repr=False)
    R: np.ndarray = field(repr=False)

    def to_dict(self):
        return {"A": self.A, "argmax_R": self.argmax_R, "at_endpoint": self.at_endpoint,
                "r_independent": self.r_independent, "divergent": self.divergent}


def _w3(pair):
    inv = pair.psi.with_values(-np.log(pair.psi.values))
    return pair.phi.values * np.exp(ball_mean(inv, head="linear").values)


def _tail_curve(w3, grid, Q, weights):
    """``e^(Qs) sum_i w_i int_s^inf W3_i e^(-Q s') ds'`` and a divergence flag."""
    y = (w3 * np.exp(-Q * grid.s)[:, None]) @ weights
    rev = cumulative_simpson(y[::-1], dx=grid.h, initial=0.0)[::-1]
    yn, yp = y[-1], y[-2]
    divergent = False
    top = 0.0
    if yn > 0:
        rate = math.log(yn / yp) / grid.h if yp > 0 else -math.inf
        if rate >= DIVERGENCE_RATE:
            divergent = True
        else:
            top = yn / -rate
    return np.exp(Q * grid.s) * (rev + top), divergent


def a_functional(pair, R_grid=None):
    """``A = sup_R R^Q int_{|x|>=R} W3 / |x|^(2Q)`` with ``W3 = phi exp(M log(1/psi))``.

    The sup runs over the grid radii (or the grid radii nearest to
    ``R_grid``). A tail that does not decay at the top of the grid is
    reported as divergent, with ``A = inf``.
    """
    grid, model = pair.phi.grid, pair.phi.model
    curve, divergent = _tail_curve(_w3(pair), grid, model.Q, model.weights)
    if R_grid is None:
        idx = np.arange(grid.N)
    else:
        idx = np.unique([grid.index_of(math.log(R)) for R in np.atleast_1d(R_grid)])
    vals = curve[idx]
    j = int(np.argmax(vals))
    peak = float(vals[j])
    flat = bool(vals.max() - vals.min() <= 1e-8 * abs(peak))
    if divergent:
        peak = math.inf
    return AFunctional(peak, float(grid.r[idx[j]]), bool(j in (0, len(idx) - 1) and not flat),
                       flat, divergent, vals, grid.r[idx])


def _max_hardy_sides(pair, f):
    a = a_functional(pair)
    if a.divergent:
        raise PreconditionError("A(phi, psi) diverges: the inequality cannot hold uniformly",
                                inequality="maximal-hardy")
    model = f.model
    C = math.e * a.A * model.Q / model.sphere_measure
    lhs = integral(pair.phi * geometric_mean_transform(f))
    rhs = C * integral(pair.psi * f)
    return (lhs, rhs), C, a


def check_max_hardy(pair, f):
    """``int phi exp(M log f) <= C int psi f`` with ``C = e A Q / |sphere|``."""
    if f.grid != pair.phi.grid or f.model is not pair.phi.model:
        raise InvalidInputError("f and the weights live on different grids or models")
    sides, C, a = _max_hardy_sides(pair, f)
    coarse = None
    if f.grid.N >= 32:
        coarse = _max_hardy_sides(pair.coarsen(), f.coarsen())[0]
    return make_report("maximal-hardy", sides, coarse, "le", C, "sufficiency",
                       meta={"A": a.A, "argmax_R": a.argmax_R, "r_independent": a.r_independent})


# ------------------------------------------------------------------ witness

def witness(model, grid, R):
    """``u = R^-Q on |x| < R`` and ``e^(-2Q) |x|^(-2Q) R^Q`` beyond."""
    if not R > 0:
        raise InvalidInputError("witness radius must be positive")
    Q, r = model.Q, grid.r
    vals = np.where(r < R, R ** -Q, math.exp(-2 * Q) * r ** (-2 * Q) * R ** Q)
    return Field(model, grid, vals, {"witness_R": R})


def witness_log_mean(model, grid, R):
    """Closed form of ``M log u`` for the witness (continuous at ``R``)."""
    Q, r = model.Q, grid.r
    lr = math.log(R)
    with np.errstate(over="ignore"):
        rq = (R / r) ** Q
    outer = Q * (-rq * lr + (lr - 2 + 2 / Q) * (1 - rq) - 2 * (np.log(r) - rq * lr))
    vals = np.where(r <= R, -Q * lr, outer)
    return Field(model, grid, vals, {"witness_R": R, "log_mean": True})


def _simpson_piece(func, a, b, n):
    s = np.linspace(a, b, n)
    return simpson(func(s), x=s)


def witness_integral(model, grid, R, n=None):
    """``int u dx`` by Simpson quadrature on each side of ``ln R``.

    The integrand ``u e^(Qs)`` is exponential on both pieces; the parts below
    ``s_min`` and above ``s_max`` are added from the local exponential rate.
    """
    Q = model.Q
    a, b, c = grid.s_min, math.log(R), grid.s_max
    n = n or grid.N | 1

    def inner(s):
        return R ** -Q * np.exp(Q * s)

    def outer(s):
        return math.exp(-2 * Q) * R ** Q * np.exp(-Q * s)

    total = 0.0
    for func, lo, hi in ((inner, a, min(b, c)), (outer, max(a, b), c)):
        if hi > lo:
            total += _simpson_piece(func, lo, hi, n)
    # exponential continuation beyond the grid, rate from two samples
    h = grid.h
    f0 = inner(a) if b > a else outer(a)
    rate0 = math.log((inner(a + h) if b > a + h else outer(a + h)) / f0) / h
    fN = outer(c) if b < c else inner(c)
    rateN = math.log(fN / (outer(c - h) if b < c - h else inner(c - h))) / h
    total += f0 / rate0 + fN / -rateN
    return model.sphere_measure * total


@dataclass
class NecessityPoint:
    R: float
    lhs: float
    lower_bound: float
    witness_integral: float
    consistent: bool

    @property
    def required_constant(self):
        return self.lhs / self.witness_integral


def necessity_probe(pair, R_grid, rtol=1e-8):
    """Evaluate ``int W3 exp(M log u_R)`` against ``e^(2-2Q) A(R)`` for each ``R``.

    ``A(R) = R^Q int_{|x|>=R} W3 / |x|^(2Q)``. The lower bound must not
    exceed the left side; ``consistent`` records this within ``rtol``.
    """
    model, grid = pair.phi.model, pair.phi.grid
    Q = model.Q
    w3 = _w3(pair)
    curve, _ = _tail_curve(w3, grid, Q, model.weights)
    out = []
    for R in np.atleast_1d(R_grid):
        lm = witness_log_mean(model, grid, R)
        lhs = integral(Field(model, grid, w3 * np.exp(lm.values)))
        lower = math.exp(2 - 2 * Q) * curve[grid.index_of(math.log(R))]
        ui = witness_integral(model, grid, R)
        out.append(NecessityPoint(float(R), lhs, float(lower), ui,
                                  bool(lhs >= lower * (1 - rtol))))
    return out
