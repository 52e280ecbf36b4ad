"""Radially weighted Hardy inequalities, uncertainty principles and ``I_delta``.

For a differentiable radial weight ``phi`` and ``p > 1``

    int phi'(|x|) |x|^(1-Q) |f|^p
        <= int |R f|^p + (p - 1) int |phi|^(p/(p-1)) |x|^(-p(Q-1)/(p-1)) |f|^p

and the multiplicative (Holder) form with ``p (.)^(1/p) (.)^((p-1)/p)`` on the
right. Euclidean gradient versions are realized on radial fields, where
``|grad f| = |R f|``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, PreconditionError, TruncationError, UnsupportedError
from .field import lp_norm, radial_derivative_apply
from .group_model import integrate_samples
from .report import ERR_FLOOR, InequalityReport, make_report

__all__ = [
    "RadialWeightFn",
    "NonlocalEstimate",
    "log_weight",
    "power_weight",
    "check_thm61_additive",
    "check_thm61_multiplicative",
    "check_thm62",
    "check_critical_hardy",
    "check_uncertainty_hpw",
    "nonlocal_functional",
    "check_prop63",
]


@dataclass(frozen=True)
class RadialWeightFn:
    """Radial weight ``phi(r)`` with its derivative ``phi'(r)``."""

    value: Callable
    derivative: Callable
    name: str = "custom"

    def derivative_mismatch(self, grid, lo=None, hi=None):
        """Max relative gap between ``derivative`` and centered differences of ``value``."""
        s = grid.s[(grid.s >= (lo if lo is not None else grid.s_min + 1))
                   & (grid.s <= (hi if hi is not None else grid.s_max - 1))]
        r = np.exp(s)
        eps = 1e-5
        fd = (self.value(r * (1 + eps)) - self.value(r * (1 - eps))) / (2 * eps * r)
        d = self.derivative(r)
        return float(np.max(np.abs(fd - d) / np.maximum(np.abs(d), 1e-300)))


def log_weight():
    return RadialWeightFn(np.log, lambda r: 1.0 / r, "log")


def power_weight(a):
    return RadialWeightFn(lambda r: r ** a, lambda r: a * r ** (a - 1), f"power{a:g}")


def _weighted_lp(f, p, weight):
    w = np.broadcast_to(weight(f.grid.r[:, None], f.model.sphere_points), f.values.shape)
    return integrate_samples(f.model, f.grid, w * np.abs(f.values) ** p)


def _terms_signed(phi, f, p, q):
    # phi' may change sign, so the left side is integrated directly
    Q = f.model.Q
    lhs = _weighted_lp(f, p, lambda r, y: phi.derivative(r) * r ** (1 - Q))
    rf = lp_norm(radial_derivative_apply(f), p) ** p
    wt = _weighted_lp(f, p, lambda r, y: np.abs(phi.value(r)) ** q * r ** (-q * (Q - 1)))
    return lhs, rf, wt


def _additive(t, p, q):
    lhs, rf, wt = t
    return lhs, rf + (p / q) * wt


def _multiplicative(t, p, q):
    lhs, rf, wt = t
    return lhs, p * rf ** (1 / p) * wt ** (1 / q)


def _report(name, phi, f, p, q, combine):
    if not p > 1:
        raise InvalidInputError(f"p must exceed 1, got {p}")
    fine = combine(_terms_signed(phi, f, p, q), p, q)
    coarse = None
    if f.grid.N >= 32:
        coarse = combine(_terms_signed(phi, f.coarsen(), p, q), p, q)
    return make_report(name, fine, coarse, "le", 1.0, "sharp",
                       meta={"p": p, "q": q, "phi": phi.name})


def check_thm61_additive(phi, f, p):
    """Additive (Young) form with the conjugate exponent ``p/(p-1)``."""
    if not p > 1:
        raise InvalidInputError(f"p must exceed 1, got {p}")
    return _report("radial-weight-additive", phi, f, p, p / (p - 1), _additive)


def check_thm61_multiplicative(phi, f, p):
    """Multiplicative (Holder) form with the conjugate exponent ``p/(p-1)``."""
    if not p > 1:
        raise InvalidInputError(f"p must exceed 1, got {p}")
    return _report("radial-weight-multiplicative", phi, f, p, p / (p - 1), _multiplicative)


def check_thm62(phi, f, p, q):
    """Both forms with an explicit conjugate pair ``1/p + 1/q = 1``.

    The additive coefficient is ``p/q``, which equals ``p - 1``.
    """
    if not p > 1:
        raise InvalidInputError(f"p must exceed 1, got {p}")
    if abs(1 / p + 1 / q - 1) > 1e-12:
        raise InvalidInputError(f"p={p}, q={q} are not conjugate")
    return (_report("radial-weight-additive-pq", phi, f, p, q, _additive),
            _report("radial-weight-multiplicative-pq", phi, f, p, q, _multiplicative))


def check_critical_hardy(f, n=None):
    """``int |f|^n/|x|^n <= int |grad f|^n + (n-1) int |log(1/|x|)|^(n/(n-1)) |f|^n/|x|^n``.

    Run on radial fields of a Euclidean model, where ``|grad f| = |R f|``.
    """
    model = f.model
    n = n or model.ambient_dim
    if model.norm is None or model.norm.kind != "euclidean" or model.norm.p != 2.0:
        raise PreconditionError("critical Hardy needs the Euclidean 2-norm",
                                inequality="critical-hardy")
    if not f.is_radial:
        raise PreconditionError("critical Hardy is checked on radial fields only",
                                inequality="critical-hardy")
    if not n >= 2 or abs(model.Q - n) > 1e-12:
        raise PreconditionError("critical Hardy needs p = n = Q >= 2", inequality="critical-hardy")
    rep = check_thm61_additive(log_weight(), f, float(n))
    rep.name = "critical-hardy"
    return rep


def _hpw_sides(f, const):
    l2 = lp_norm(f, 2) ** 2
    rf = lp_norm(radial_derivative_apply(f), 2) ** 2
    x2 = lp_norm(f, 2, weight=lambda r, y: r ** 2) ** 2
    return l2 * l2, const * rf * x2


def check_uncertainty_hpw(f, variant="improved"):
    """``(int |f|^2)^2 <= c int |grad f|^2 int |x|^2 |f|^2``.

    ``variant="improved"`` uses ``c = (2/n)^2`` (``n >= 2``); ``"classical"``
    uses ``c = (2/(n-2))^2`` (``n >= 3``). Radial fields only.
    """
    model = f.model
    n = model.ambient_dim or model.Q
    if not f.is_radial:
        raise PreconditionError("uncertainty principle is checked on radial fields only",
                                inequality="hpw")
    if variant in ("improved", "improved-2/n"):
        if n < 2:
            raise PreconditionError("improved variant needs n >= 2", inequality="hpw")
        const, variant = (2 / n) ** 2, "improved"
    elif variant in ("classical", "classical-2/(n-2)"):
        if n < 3:
            raise PreconditionError("classical variant needs n >= 3", inequality="hpw")
        const, variant = (2 / (n - 2)) ** 2, "classical"
    else:
        raise InvalidInputError(f"unknown variant {variant!r}")
    fine = _hpw_sides(f, const)
    coarse = _hpw_sides(f.coarsen(), const) if f.grid.N >= 32 else None
    return make_report(f"hpw-{variant}", fine, coarse, "le", const, "sharp",
                       meta={"variant": variant, "n": n})


# ------------------------------------------------------------- nonlocal I_delta

@dataclass
class NonlocalEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"value": self.value, "stderr": self.stderr, "samples": self.samples,
                "seed": self.seed, "params": self.params}


def _sampler(f):
    """Return ``eval(points) -> f`` for a field on a Euclidean model."""
    model, grid = f.model, f.grid
    n = model.ambient_dim
    vals = np.asarray(f.values.real if f.is_complex else f.values)
    if f.is_radial:
        prof = vals[:, 0]

        def ev(x):
            r = model.norm(x)
            s = np.log(np.maximum(r, 1e-300))
            out = np.interp(s, grid.s, prof, left=prof[0], right=0.0)
            return np.where(s > grid.s_max, 0.0, out)
        return ev
    if n == 1:
        left, right = (0, 1) if model.nodes[0, 0] < 0 else (1, 0)

        def ev(x):
            x = x[..., 0]
            s = np.log(np.maximum(np.abs(x), 1e-300))
            a = np.interp(s, grid.s, vals[:, left], left=vals[0, left], right=0.0)
            b = np.interp(s, grid.s, vals[:, right], left=vals[0, right], right=0.0)
            return np.where(s > grid.s_max, 0.0, np.where(x < 0, a, b))
        return ev
    raise UnsupportedError("I_delta for non-radial fields is implemented for n = 1 only")


def _sphere_directions(model, rng, size):
    """Directions ``y`` on the quasi-sphere with importance weights for ``sigma``."""
    n = model.ambient_dim
    om = rng.normal(size=(size, n))
    om /= np.linalg.norm(om, axis=1, keepdims=True)
    nq = model.norm(om)
    area = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
    w = area * nq ** (-n) / model.sphere_measure
    return om / nq[:, None], w


def nonlocal_functional(f, delta, samples=100_000, seed=0, batches=32):
    """Monte Carlo estimate of ``I_delta(f)`` on a Euclidean model.

    ``I = int int_{|f(y)-f(x)| > delta} delta^2 / |x - y|^(Q+2) dx dy``. With
    ``S = {|f| > delta/2}`` only pairs with ``x`` or ``x + z`` in ``S``
    contribute, so by symmetry
    ``I = int_S int (2 - 1_S(x+z)) 1[|f(x+z)-f(x)| > delta] delta^2 |z|^-(Q+2) dz dx``.
    ``x`` is uniform in a box around ``S``; ``z = rho y`` with ``rho`` Pareto
    (density ``~ rho^-3`` on ``[z_min, inf)``) and ``y`` distributed by the
    sphere measure. ``z_min = delta / (2 L)`` with ``L`` 1.1 times the largest
    ``|R f|``, so the excluded core cannot satisfy the indicator.
    """
    model, grid = f.model, f.grid
    if not delta > 0:
        raise InvalidInputError("delta must be positive")
    if model.norm is None or model.norm.kind != "euclidean" or model.ambient_dim not in (1, 2, 3):
        raise UnsupportedError("I_delta is implemented for Euclidean models with n in {1, 2, 3}")
    if samples < batches:
        raise InvalidInputError(f"need at least {batches} samples")
    n, Q = model.ambient_dim, model.Q
    raw = f.values.real if f.is_complex else f.values
    if float(raw.max() - raw.min()) <= delta:
        # |f(y) - f(x)| <= delta everywhere: the indicator never fires
        return NonlocalEstimate(0.0, 0.0, int(samples), int(seed),
                                {"delta": delta, "oscillation_below_delta": True})
    vals = np.abs(f.values)
    if vals[-1].max() >= delta / 2:
        raise TruncationError("|f| >= delta/2 at the outer grid edge", magnitude=float(vals[-1].max()))
    L = 1.1 * float(np.abs(radial_derivative_apply(f.real() if f.is_complex else f).values).max())
    params = {"delta": delta, "lipschitz": L}
    if L == 0 or vals.max() <= delta / 2:
        return NonlocalEstimate(0.0, 0.0, int(samples), int(seed), dict(params, z_min=None))
    inside = np.nonzero(vals.max(axis=1) > delta / 2)[0]
    r_s = float(grid.r[inside[-1] + 1])
    # box enclosing the quasi-ball of radius r_s
    half = r_s * float(np.max(np.linalg.norm(model.nodes, axis=1)))
    z_min = delta / (2 * L)
    ev = _sampler(f)
    rng = np.random.default_rng(seed)
    per = samples // batches
    means = np.empty(batches)
    for b in range(batches):
        x = rng.uniform(-half, half, size=(per, n))
        y, wy = _sphere_directions(model, rng, per)
        rho = z_min * rng.uniform(size=per) ** -0.5
        xz = x + rho[:, None] * y
        fx, fxz = ev(x), ev(xz)
        in_x = np.abs(fx) > delta / 2
        in_xz = np.abs(fxz) > delta / 2
        hit = np.abs(fxz - fx) > delta
        means[b] = np.mean(wy * hit * in_x * (2.0 - in_xz))
    scale = (2 * half) ** n * delta ** 2 * model.sphere_measure / (2 * z_min ** 2)
    value = scale * means.mean()
    stderr = scale * means.std(ddof=1) / math.sqrt(batches)
    params.update({"z_min": z_min, "z_max": math.inf, "box_half_width": half, "batches": batches})
    return NonlocalEstimate(float(value), float(stderr), int(per * batches), int(seed), params)


def _prop63_lhs(f):
    nsq = lp_norm(f, 2) ** 2
    a = np.abs(f.values) ** 2 / nsq
    ent = np.zeros_like(a)
    nz = a > 0
    ent[nz] = a[nz] * np.log(a[nz])
    return integrate_samples(f.model, f.grid, ent) + f.model.Q / 2 * math.log(nsq), nsq


def check_prop63(f, delta, C_Q, lambda_Q=None, I_delta=None, samples=200_000, seed=0):
    """Logarithmic Sobolev type bound through ``I_delta`` with a trial constant.

    ``lhs = int (|f|^2/||f||^2) log(|f|^2/||f||^2) + (Q/2) log ||f||^2`` and
    ``rhs = (Q/2) log(C_Q delta^(4/Q) ||f||^((2Q-4)/Q) + C_Q I_delta(f))``.
    The meta entry ``C_min`` is the smallest constant for which the bound
    holds for this ``f``. The hypothesis relating level sets of ``f`` to
    ``I_delta`` (the only place ``lambda_Q`` enters) is not verified; it is
    flagged as assumed and ``lambda_Q`` is recorded as given.
    """
    Q = f.model.Q
    if not Q >= 3:
        raise PreconditionError("the bound needs Q >= 3", inequality="prop-6.3")
    if not C_Q > 0:
        raise InvalidInputError("trial constant must be positive")
    est = None
    if I_delta is None:
        est = nonlocal_functional(f, delta, samples, seed)
        I_delta = est.value
    lhs, nsq = _prop63_lhs(f)
    base = delta ** (4 / Q) * math.sqrt(nsq) ** ((2 * Q - 4) / Q) + I_delta
    rhs = Q / 2 * math.log(C_Q * base)
    c_min = math.exp(2 * lhs / Q) / base
    err = ERR_FLOOR
    if est is not None and I_delta > 0:
        err += Q / 2 * est.stderr / base
    status = "holds" if lhs <= rhs + err else "violated"
    meta = {"delta": delta, "I_delta": I_delta, "C_min": c_min, "assumed_hypothesis": True,
            "lambda_Q": lambda_Q,
            "I_delta_stderr": est.stderr if est else None}
    return InequalityReport("log-sobolev-nonlocal", float(lhs), float(rhs), float(C_Q), "trial",
                            float(c_min / C_Q), status, float(err), "le", meta)
