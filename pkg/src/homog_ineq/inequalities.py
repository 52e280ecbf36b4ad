"""Hardy, Sobolev and Gagliardo-Nirenberg type inequalities for the Euler operator.

Each ``check_*`` function evaluates both sides of an inequality on a Field
and returns an :class:`InequalityReport`. Statements with an explicit sharp
constant are judged (holds / violated); those whose constant is not explicit
report the empirical constant ``lhs / rhs`` instead.

The error estimate of every report is the change of its ratio when the field
is resampled on every other grid point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

from .errors import InvalidInputError, PreconditionError
from .field import (Field, ds_apply, euler_apply, lp_norm, radial_derivative_apply,
                    sphere_mean)
from .group_model import RadialGrid, integrate_samples
from .report import make_report
from .semigroup import TimeGrid, besov_norm, to_line
from .special import gamma

__all__ = [
    "COROLLARIES",
    "BlissExtremizer",
    "sQ_constant",
    "bliss_constant",
    "check_bliss",
    "check_bliss_quad",
    "check_sobolev_type",
    "check_hardy",
    "check_gn",
    "check_corollary",
    "cor4_identity",
    "check_stubbe",
    "stubbe_line_profile",
    "stubbe_extremizer",
]

SUPPORT_TOL = 1e-12

COROLLARIES = ("4.3a", "4.3b", "4.3c", "4.3d", "4.4a", "4.4b", "4.5a", "4.5b", "4.5c",
               "4.6a", "4.6b", "4.6c", "4.7", "4.8", "4.9")


def _both(fn, f, *args, **kw):
    """Evaluate ``fn`` on ``f`` and on its every-other-sample coarsening."""
    fine = fn(f, *args, **kw)
    try:
        coarse = fn(f.coarsen(), *args, **kw)
    except InvalidInputError:
        coarse = None
    return fine, coarse


# ---------------------------------------------------------------- constants

def sQ_constant(Q, sphere_measure):
    """Sharp constant of the Stubbe-type inequality.

    ``|sphere|^(2/Q) Q^((Q-2)/Q) (Q-2) (Gamma(Q/2) Gamma(1+Q/2) / Gamma(Q))^(2/Q)``.
    ``sphere_measure`` may be a GroupModel.
    """
    if not Q > 2:
        raise InvalidInputError(f"S_Q needs Q > 2, got {Q}")
    meas = getattr(sphere_measure, "sphere_measure", sphere_measure)
    g = gamma(Q / 2) * gamma(1 + Q / 2) / gamma(Q)
    return meas ** (2 / Q) * Q ** ((Q - 2) / Q) * (Q - 2) * g ** (2 / Q)


def bliss_constant(p, q):
    """Sharp constant ``C_{p,q}`` of the Bliss inequality."""
    if not p > 1 or not q > p:
        raise InvalidInputError(f"Bliss constant needs q > p > 1, got p={p}, q={q}")
    ratio = (q / p - 1) * gamma(p * q / (q - p)) / (gamma(p / (q - p)) * gamma(p * (q - 1) / (q - p)))
    return (q - q / p) ** (-p / q) * ratio ** ((q - p) / q)


@dataclass(frozen=True)
class BlissExtremizer:
    """``f(r) = c1 (c2 r^(q/p-1) + 1)^(q/(p-q))``, the Bliss equality case."""

    c1: float = 1.0
    c2: float = 1.0
    p: float = 2.0
    q: float = 6.0

    def __post_init__(self):
        if not (self.c1 > 0 and self.c2 > 0):
            raise InvalidInputError("Bliss extremizer needs c1, c2 > 0")
        if not (self.p > 1 and self.q > self.p):
            raise InvalidInputError("Bliss extremizer needs q > p > 1")

    @property
    def k(self):
        return self.q / self.p - 1

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            return self.c1 * (self.c2 * r ** self.k + 1) ** (self.q / (self.p - self.q))

    def antiderivative(self, r):
        """``int_0^r f = c1 r (c2 r^k + 1)^(p/(p-q))``."""
        r = np.asarray(r, dtype=float)
        with np.errstate(over="ignore"):
            return self.c1 * r * (self.c2 * r ** self.k + 1) ** (self.p / (self.p - self.q))


# --------------------------------------------------------------------- Bliss

def _head(vals, r, h):
    """``int_0^{r_0} v dr`` for a local power law ``v ~ r^a`` fitted at the first samples."""
    v0, v1 = vals[0], vals[1]
    if v0 <= 0 or v1 <= 0:
        return 0.0
    a = math.log(v1 / v0) / h
    return v0 * r[0] / (a + 1) if a > -1 else math.inf


def _bliss_sides(f, grid, p, q):
    r, h = grid.r, grid.h
    F = f[0] * r[0] + cumulative_trapezoid(f * r, dx=h, initial=0.0)
    tw = grid.trapezoid_weights
    outer = np.abs(F) ** q * r ** (q / p - q - 1)
    inner = np.abs(f) ** p
    lhs = (tw @ (outer * r) + _head(outer, r, h)) ** (p / q)
    rhs = bliss_constant(p, q) * (tw @ (inner * r) + _head(inner, r, h))
    return lhs, rhs


def check_bliss(f, p, q, grid=None):
    """Bliss inequality on samples of ``f`` at the radii of a log grid.

    ``f`` is an array of samples at ``grid.r`` or a callable of ``r``. The
    inner integral ``int_0^s f`` is a trapezoid prefix sum in ``ln r`` with
    the head ``f(r_0) r_0``.
    """
    grid = grid or RadialGrid()
    vals = np.asarray(f(grid.r) if callable(f) else f, dtype=float)
    if vals.shape != (grid.N,):
        raise InvalidInputError("Bliss samples must be one value per grid radius")
    if np.any(vals < 0) or not np.all(np.isfinite(vals)):
        raise InvalidInputError("Bliss inequality needs finite non-negative samples")
    C = bliss_constant(p, q)
    fine = _bliss_sides(vals, grid, p, q)
    coarse = _bliss_sides(vals[::2], grid.coarsen(), p, q) if grid.N >= 32 else None
    return make_report("bliss", fine, coarse, "le", C, "sharp",
                       meta={"p": p, "q": q, "route": "samples", "grid": grid.to_dict()})


def check_bliss_quad(func, p, q, epsrel=1e-11):
    """Bliss inequality by adaptive quadrature of a callable ``func(r)``.

    The inner integral is itself an adaptive quadrature, so no closed form of
    the antiderivative is used.
    """
    C = bliss_constant(p, q)

    def prim(r):
        if r <= 1.0:
            return quad(func, 0.0, r, epsabs=0, epsrel=epsrel, limit=200)[0]
        return (quad(func, 0.0, 1.0, epsabs=0, epsrel=epsrel, limit=200)[0]
                + quad(func, 1.0, r, epsabs=0, epsrel=epsrel, limit=200)[0])

    def outer(r):
        return abs(prim(r)) ** q * r ** (q / p - q - 1) if r > 0 else 0.0

    kw = dict(epsabs=0, epsrel=epsrel, limit=400)
    lo, e1a = quad(outer, 0.0, 1.0, **kw)
    hi, e1b = quad(outer, 1.0, math.inf, **kw)
    lhs_int, e1 = lo + hi, e1a + e1b
    ra, e2a = quad(lambda r: abs(func(r)) ** p, 0.0, 1.0, **kw)
    rb, e2b = quad(lambda r: abs(func(r)) ** p, 1.0, math.inf, **kw)
    rhs_int, e2 = ra + rb, e2a + e2b
    if any(v < 0 for v in np.atleast_1d(func(np.array([1e-3, 1.0, 1e3])))):
        raise InvalidInputError("Bliss inequality needs a non-negative function")
    lhs, rhs = lhs_int ** (p / q), C * rhs_int
    err = (p / q) * e1 / max(lhs_int, 1e-300) + e2 / max(rhs_int, 1e-300)
    return make_report("bliss", (lhs, rhs), None, "le", C, "sharp",
                       meta={"p": p, "q": q, "route": "adaptive-quadrature"}, err_extra=err)


# ------------------------------------------------------ Sobolev-type / Hardy

def _sobolev_sides(f, p):
    ef = euler_apply(f)
    return lp_norm(f, p) ** p, (p / f.model.Q) ** p * lp_norm(ef, p) ** p


def check_sobolev_type(f, p=2.0):
    """``int |f|^p <= (p/Q)^p int |E f|^p``."""
    if not p >= 1:
        raise InvalidInputError("p must be >= 1")
    fine, coarse = _both(_sobolev_sides, f, p)
    return make_report("sobolev-type", fine, coarse, "le", (p / f.model.Q) ** p, "sharp",
                       meta={"p": p})


def _hardy_sides(f):
    Q = f.model.Q
    rf = radial_derivative_apply(f)
    lhs = lp_norm(f, 2, weight=lambda r, y: r ** -2.0) ** 2
    return lhs, (2 / (Q - 2)) ** 2 * lp_norm(rf, 2) ** 2


def check_hardy(f):
    """``int |f|^2/|x|^2 <= (2/(Q-2))^2 int |R f|^2`` for ``Q > 2``."""
    Q = f.model.Q
    if not Q > 2:
        raise PreconditionError("Hardy inequality needs Q > 2", inequality="hardy")
    fine, coarse = _both(_hardy_sides, f)
    return make_report("hardy", fine, coarse, "le", (2 / (Q - 2)) ** 2, "sharp")


# ------------------------------------------------------ line-side machinery

def _line_data(f):
    """``(g, dg)`` with ``g = F f`` and ``dg = d g / ds``."""
    g = to_line(f)
    dg, _ = ds_apply(g.values, f.grid.h)
    return g.values, dg


def _lnorm(vals, f, p):
    """Norm in ``L^p(R x sphere)`` (any ``p > 0``)."""
    a = np.abs(vals) ** p
    return float(((f.grid.trapezoid_weights @ a) @ f.model.weights) ** (1 / p))


def _lnorm_cols(vals, f, p):
    a = np.abs(vals) ** p
    return (f.grid.trapezoid_weights @ a) ** (1 / p)


def _lnorm_1d(v, f, p):
    return float((f.grid.trapezoid_weights @ (np.abs(v) ** p)) ** (1 / p))


def _line_mean(vals, f):
    w = f.model.weights
    return vals @ w / w.sum()


def _gn_sides(f, p, q, times):
    g, dg = _line_data(f)
    a = _lnorm(g, f, q)
    b = _lnorm(dg, f, p)
    bes = besov_norm(to_line(f), p / (p - q), times)
    return a, b ** (p / q) * bes.value ** (1 - p / q), bes


def check_gn(f, p, q, times=None):
    """Gagliardo-Nirenberg type inequality on the line ``R x sphere``.

    ``||F f||_q <= C ||d/ds F f||_p^(p/q) ||f||_B^(1-p/q)`` with the Besov-type
    exponent ``p/(p-q)``; the report carries the empirical ``C``.
    """
    if not (1 <= p < q):
        raise InvalidInputError(f"GN inequality needs 1 <= p < q, got p={p}, q={q}")
    times = times or TimeGrid()
    fine = _gn_sides(f, p, q, times)
    coarse = _gn_sides(f.coarsen(), p, q, times) if f.grid.N >= 32 else None
    bes = fine[2]
    return make_report("gn", fine[:2], coarse[:2] if coarse else None, empirical=True,
                       meta={"p": p, "q": q, "besov": bes.value, "besov_argmax_t": bes.argmax_t,
                             "besov_at_endpoint": bes.at_endpoint})


# --------------------------------------------------------------- corollaries

def _support_s(f):
    a = np.abs(f.values).max(axis=1)
    peak = a.max()
    if peak == 0:
        return 0.0, 0.0
    idx = np.nonzero(a > SUPPORT_TOL * peak)[0]
    return float(f.grid.s[idx[0]]), float(f.grid.s[idx[-1]])


def _group_terms(h):
    """``||E h||^2``, ``||h||^2`` and the sphere mean of ``h``."""
    return lp_norm(euler_apply(h), 2) ** 2, lp_norm(h, 2) ** 2, sphere_mean(h)


def _r_terms(f):
    """``||R f||^2``, ``||f/|x| ||^2``."""
    rf = radial_derivative_apply(f)
    return lp_norm(rf, 2) ** 2, lp_norm(f, 2, weight=lambda r, y: r ** -2.0) ** 2


def _two_star(Q):
    return 2 * Q / (Q - 2)


def _weighted_norm_sq(f, ts, power):
    """``(int |x|^(power ts) |f|^ts)^(2/ts)``: ``|| |x|^power f ||^2_ts``."""
    return lp_norm(f, ts, weight=lambda r, y: r ** (power * ts)) ** 2


def _cor_sides(f, name, params):
    Q = f.model.Q
    meta = {}
    if name.startswith("4.3") or name.startswith("4.4"):
        g, dg = _line_data(f)
        if name.startswith("4.3"):
            p = params.get("p", 1.0)
            if not (1 <= p <= Q - 1):
                raise PreconditionError(f"corollary {name} needs 1 <= p <= Q-1", inequality=name)
            ps = Q * p / (Q - p)
            dR = _lnorm(dg, f, p)
            meta["p_star"] = ps
            if name in ("4.3c", "4.3d"):
                lo, hi = _support_s(f)
                lam = params.get("Lambda")
                if lam is None:
                    lam = max(abs(lo), abs(hi))
                elif max(abs(lo), abs(hi)) > lam:
                    raise PreconditionError(f"corollary {name}: support exceeds [-Lambda, Lambda]",
                                            inequality=name)
                meta["Lambda"] = lam
            if name == "4.3a":
                return (_lnorm(g, f, ps),
                        dR ** (1 / Q) * _lnorm_cols(g, f, p).max() ** ((Q - 1) / Q), meta)
            if name == "4.3b":
                return (_lnorm_1d(_line_mean(g, f), f, ps),
                        dR ** (1 / Q) * _lnorm(g, f, p) ** ((Q - 1) / Q), meta)
            if name == "4.3c":
                return (_lnorm(g, f, ps), lam ** ((Q - 1) / Q ** 2) * dR ** (1 / Q)
                        * _lnorm_cols(g, f, ps).max() ** ((Q - 1) / Q), meta)
            return _lnorm_1d(_line_mean(g, f), f, ps), lam ** ((Q - 1) / Q) * dR, meta
        p, q = params.get("p", 2.0), params.get("q", 4.0)
        if not (1 <= p < q):
            raise PreconditionError(f"corollary {name} needs 1 <= p < q", inequality=name)
        m = q / p - 1
        dR = _lnorm(dg, f, p) ** (p / q)
        if name == "4.4a":
            return _lnorm(g, f, q), dR * _lnorm_cols(g, f, m).max() ** (1 - p / q), meta
        return _lnorm_1d(_line_mean(g, f), f, q), dR * _lnorm(g, f, m) ** (1 - p / q), meta

    if not Q >= 3 and name != "4.9":
        raise PreconditionError(f"corollary {name} needs Q >= 3", inequality=name)
    ts = _two_star(Q) if Q > 2 else math.inf

    if name in ("4.7", "4.8"):
        R = params.get("R")
        if R is None or not R > 1:
            raise PreconditionError(f"corollary {name} needs an annulus radius R > 1",
                                    inequality=name)
        lo, hi = _support_s(f)
        if lo < -math.log(R) - 1e-12 or hi > math.log(R) + 1e-12:
            raise PreconditionError(f"corollary {name}: support leaves the annulus 1/R <= |x| <= R",
                                    inequality=name)
        log_factor = math.log(R) ** (2 * (Q - 1) / Q)
        meta["log_factor"] = log_factor
        if name == "4.7":
            eh, hh, gm = _group_terms(f)
            return _weighted_norm_sq(gm, ts, 1.0), log_factor * (eh - Q * Q / 4 * hh), meta
        rf, fx = _r_terms(f)
        return (_weighted_norm_sq(sphere_mean(f), ts, 0.0),
                log_factor * (rf - (Q - 2) ** 2 / 4 * fx), meta)

    if name.startswith("4.5"):
        eh, hh, gm = _group_terms(f)
        a_term = eh - Q * Q / 4 * hh
        if name == "4.5a":
            mu = _lnorm_cols(f.values * np.exp(0.5 * Q * f.grid.s)[:, None], f, 2).max()
            return _weighted_norm_sq(f, ts, 1.0), a_term ** (1 / Q) * mu ** (2 * (1 - 1 / Q)), meta
        if name == "4.5b":
            return _weighted_norm_sq(gm, ts, 1.0), a_term ** (1 / Q) * hh ** (1 - 1 / Q), meta
        delta = _delta(params, Q * Q / 4, name)
        return (_weighted_norm_sq(f, ts, 1.0),
                (Q * Q / 4 - delta) ** (-(Q - 1) / Q) * (eh - delta * hh), meta)

    if name.startswith("4.6"):
        rf, fx = _r_terms(f)
        b_term = rf - (Q - 2) ** 2 / 4 * fx
        gm = sphere_mean(f)
        if name == "4.6a":
            # sup over nodes of || f(., y)/|.| ||^2 in L^2(r^(Q-1) dr)
            cols = _lnorm_cols(f.values * np.exp((0.5 * Q - 1) * f.grid.s)[:, None], f, 2)
            return (_weighted_norm_sq(f, ts, 0.0),
                    b_term ** (1 / Q) * (cols.max() ** 2) ** (1 - 1 / Q), meta)
        if name == "4.6b":
            return (_weighted_norm_sq(gm, ts, 0.0),
                    b_term ** (1 / Q) * fx ** ((Q - 1) / Q), meta)
        delta = _delta(params, (Q - 2) ** 2 / 4, name)
        return (_weighted_norm_sq(gm, ts, 0.0),
                ((Q - 2) ** 2 / 4 - delta) ** (-(Q - 1) / Q) * (rf - delta * fx), meta)

    if name == "4.9":
        q = params.get("q", 4.0)
        if not 2 < q < math.inf:
            raise PreconditionError(f"corollary {name} needs 2 < q < inf", inequality=name)
        w = Q * (6 - q) / (2 * (q - 2))
        m = q / 2 - 1
        meta["weight_exponent"] = w
        if w == 0:
            meta["weight_exponent_zero"] = True
        gm = sphere_mean(f).profile
        lhs = float(f.grid.trapezoid_weights @ (np.abs(gm) ** q * np.exp(f.grid.s * Q * q / 2)))
        eh, hh, _ = _group_terms(f)
        wn = integrate_samples(f.model, f.grid,
                               np.abs(f.values) ** m * np.exp(-w * m * f.grid.s)[:, None])
        return lhs, (eh - Q * Q / 4 * hh) ** 2 * wn ** ((q - 2) / m), meta
    raise InvalidInputError(f"unknown corollary {name!r}; choose from {COROLLARIES}")


def _delta(params, upper, name):
    delta = params.get("delta", 0.0)
    if not 0 <= delta < upper:
        raise PreconditionError(f"corollary {name} needs 0 <= delta < {upper:g}", inequality=name)
    return delta


def check_corollary(name, f, **params):
    """Empirical-constant report for one of the corollaries in ``COROLLARIES``.

    The report ratio is ``lhs / rhs`` with the unknown constant removed from
    the right side, i.e. the empirical constant; its grid stability is the
    testable claim.
    """
    if name not in COROLLARIES:
        raise InvalidInputError(f"unknown corollary {name!r}; choose from {COROLLARIES}")
    lhs, rhs, meta = _cor_sides(f, name, params)
    try:
        coarse = _cor_sides(f.coarsen(), name, params)[:2]
    except InvalidInputError:
        coarse = None
    meta.update({k: v for k, v in params.items()})
    return make_report(f"corollary-{name}", (lhs, rhs), coarse, empirical=True, meta=meta)


def cor4_identity(h):
    """Both sides of ``int |R(|x| h)|^2 = int |E h|^2 - (Q-1) int |h|^2``.

    Returns ``(lhs, rhs, relative residual)``.
    """
    Q = h.model.Q
    xh = h.with_values(h.values * h.grid.r[:, None])
    lhs = lp_norm(radial_derivative_apply(xh), 2) ** 2
    rhs = lp_norm(euler_apply(h), 2) ** 2 - (Q - 1) * lp_norm(h, 2) ** 2
    scale = max(abs(lhs), abs(rhs), 1e-300)
    return lhs, rhs, abs(lhs - rhs) / scale


# -------------------------------------------------------------------- Stubbe

def _stubbe_sides(f, delta):
    Q = f.model.Q
    ts = _two_star(Q)
    lhs = lp_norm(euler_apply(f), 2) ** 2 - delta * lp_norm(f, 2) ** 2
    factor = ((Q * Q / 4 - delta) / ((Q - 2) ** 2 / 4)) ** ((Q - 1) / Q)
    rhs = factor * sQ_constant(Q, f.model) * _weighted_norm_sq(sphere_mean(f), ts, 1.0)
    return lhs, rhs


def check_stubbe(f, delta=0.0):
    """``int |E f|^2 - delta int |f|^2 >= K(delta) S_Q || |x| g ||^2_{2*}``.

    ``g`` is the sphere mean of ``f`` and
    ``K(delta) = ((Q^2/4 - delta) / ((Q-2)^2/4))^((Q-1)/Q)``.
    """
    Q = f.model.Q
    if not Q > 2:
        raise PreconditionError("Stubbe-type inequality needs Q > 2", inequality="stubbe")
    if not 0 <= delta < Q * Q / 4:
        raise InvalidInputError(f"delta must lie in [0, Q^2/4), got {delta}")
    fine, coarse = _both(_stubbe_sides, f, delta)
    factor = ((Q * Q / 4 - delta) / ((Q - 2) ** 2 / 4)) ** ((Q - 1) / Q)
    return make_report("stubbe", fine, coarse, "ge", factor * sQ_constant(Q, f.model), "sharp",
                       meta={"delta": delta})


def stubbe_line_profile(s, Q, delta=0.0, s0=0.0, width=1.0, amplitude=1.0):
    """Line profile ``F f`` of the Stubbe equality family.

    ``amplitude * sech(width * 2 kappa (s - s0) / (Q - 2))^((Q-2)/2)`` with
    ``kappa = sqrt(Q^2/4 - delta)``; ``width = 1`` is the equality case. It is
    the Bliss extremizer with ``p = 2``, ``q = 2Q/(Q-2)`` carried through the
    substitution used for radial functions.
    """
    kappa = math.sqrt(Q * Q / 4 - delta)
    x = np.abs(width * 2 * kappa * (np.asarray(s) - s0) / (Q - 2))
    log_sech = math.log(2.0) - x - np.log1p(np.exp(-2 * x))
    return amplitude * np.exp(0.5 * (Q - 2) * log_sech)


def stubbe_extremizer(model, grid, delta=0.0, s0=0.0, width=1.0, amplitude=1.0):
    """Radial Field whose line image is :func:`stubbe_line_profile`."""
    Q = model.Q
    if not Q > 2:
        raise InvalidInputError("Stubbe extremizer needs Q > 2")
    if not 0 <= delta < Q * Q / 4:
        raise InvalidInputError(f"delta must lie in [0, Q^2/4), got {delta}")
    s = grid.s
    g = stubbe_line_profile(s, Q, delta, s0, width, amplitude)
    return Field(model, grid, g * np.exp(-0.5 * Q * s),
                 {"family": "stubbe-extremizer", "delta": delta, "s0": s0, "width": width})
