"""Homogeneous-group models realized through polar coordinates.

A group is represented by its homogeneous dimension ``Q``, a quasi-norm and a
quadrature for the measure ``sigma`` on the unit quasi-sphere, so that

    int_G f(x) dx = int_0^inf sum_i w_i f(r y_i) r^(Q-1) dr.

Radial integrals are taken on a uniform grid in ``s = ln r`` where
``r^(Q-1) dr = e^(sQ) ds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, NumericError, UnsupportedError

__all__ = [
    "QuasiNormSpec",
    "GroupModel",
    "RadialGrid",
    "quasi_norm",
    "build_sphere_quadrature",
    "anisotropic_sphere_measure",
    "polar_integrate",
    "integrate_samples",
    "ball_volume",
]


@dataclass(frozen=True)
class QuasiNormSpec:
    """Homogeneous quasi-norm on ambient coordinates.

    kind
        ``"euclidean"`` (the l^p norm, ``p`` in [1, inf]), ``"anisotropic"``
        (``(sum |x_i|^(2N/nu_i))^(1/2N)`` with dilation weights ``nu``) or
        ``"custom"`` (``func`` evaluated on arrays of shape ``(..., n)``).
    """

    kind: str = "euclidean"
    p: float = 2.0
    nu: Optional[tuple] = None
    power: Optional[int] = None
    func: Optional[Callable] = field(default=None, compare=False)
    isotropic: bool = True

    def __post_init__(self):
        if self.kind == "euclidean":
            if not (self.p >= 1.0):
                raise InvalidInputError(f"l^p quasi-norm needs p >= 1, got {self.p}")
        elif self.kind == "anisotropic":
            if self.nu is None or self.power is None:
                raise InvalidInputError("anisotropic norm needs nu and power")
            if any(v <= 0 for v in self.nu):
                raise InvalidInputError("dilation weights must be positive")
            if self.power <= 0 or self.power % 2:
                raise InvalidInputError("power 2N must be a positive even integer")
            object.__setattr__(self, "nu", tuple(float(v) for v in self.nu))
            object.__setattr__(self, "isotropic", False)
        elif self.kind == "custom":
            if self.func is None:
                raise InvalidInputError("custom norm needs a callable")
        else:
            raise InvalidInputError(f"unknown quasi-norm kind {self.kind!r}")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            if math.isinf(self.p):
                return np.max(np.abs(x), axis=-1)
            return np.sum(np.abs(x) ** self.p, axis=-1) ** (1.0 / self.p)
        if self.kind == "anisotropic":
            nu = np.asarray(self.nu)
            terms = np.abs(x) ** (self.power / nu)
            return np.sum(terms, axis=-1) ** (1.0 / self.power)
        return np.asarray(self.func(x), dtype=float)

    def dilate(self, lam, x):
        """Apply the dilation ``D_lam`` to ambient points."""
        x = np.asarray(x, dtype=float)
        if self.kind == "anisotropic":
            return x * lam ** np.asarray(self.nu)
        return lam * x

    def homogeneous_dimension(self, n):
        if self.kind == "anisotropic":
            return float(sum(self.nu))
        return float(n)

    def to_dict(self):
        if self.kind == "euclidean":
            return {"kind": "euclidean", "p": self.p}
        if self.kind == "anisotropic":
            return {"kind": "anisotropic", "nu": list(self.nu), "power": self.power}
        return {"kind": "custom"}


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid in the log-radius ``s = ln r`` (both ends included)."""

    s_min: float = -12.0
    s_max: float = 8.0
    N: int = 4096

    def __post_init__(self):
        if not self.s_min < self.s_max:
            raise InvalidInputError("grid needs s_min < s_max")
        if self.N < 16:
            raise InvalidInputError("grid needs N >= 16")

    @cached_property
    def s(self):
        return np.linspace(self.s_min, self.s_max, self.N)

    @cached_property
    def r(self):
        return np.exp(self.s)

    @property
    def h(self):
        return (self.s_max - self.s_min) / (self.N - 1)

    @cached_property
    def trapezoid_weights(self):
        """Trapezoid weights with fourth-order Gregory end corrections.

        For fields that decay at both ends the corrections are invisible and
        the rule is the (spectrally accurate) trapezoid rule; for integrands
        that do not decay, such as truncated exponentials, the error drops
        from ``O(h^2)`` to ``O(h^4)``.
        """
        w = np.full(self.N, self.h)
        end = np.array([3 / 8, 7 / 6, 23 / 24]) * self.h
        w[:3] = end
        w[-3:] = end[::-1]
        w.flags.writeable = False
        return w

    def coarsen(self):
        """Every other sample; keeps ``s_min`` and the spacing doubles."""
        n = (self.N + 1) // 2
        return RadialGrid(self.s_min, self.s_min + 2 * self.h * (n - 1), n)

    def index_of(self, s):
        """Nearest grid index to ``s``."""
        return int(np.clip(round((s - self.s_min) / self.h), 0, self.N - 1))

    def to_dict(self):
        return {"s_min": self.s_min, "s_max": self.s_max, "N": self.N}


class GroupModel:
    """Homogeneous dimension, quasi-norm and sphere quadrature.

    ``nodes`` may be ``None`` for abstract models, in which case the sphere is
    a list of ``len(weights)`` anonymous columns. Fields on such models are
    matrices with one column per weight.
    """

    def __init__(self, Q, weights, nodes=None, norm=None, ambient_dim=None,
                 radial_only=False, label=""):
        Q = float(Q)
        if not Q > 0:
            raise InvalidInputError(f"homogeneous dimension must be positive, got {Q}")
        weights = np.array(weights, dtype=float).reshape(-1)
        if weights.size == 0 or np.any(weights <= 0):
            raise InvalidInputError("sphere weights must be positive")
        if nodes is not None:
            nodes = np.array(nodes, dtype=float)
            if nodes.ndim == 1:
                nodes = nodes[:, None]
            if nodes.shape[0] != weights.size:
                raise InvalidInputError("one node per weight required")
            ambient_dim = nodes.shape[1] if ambient_dim is None else ambient_dim
            if norm is not None:
                err = np.max(np.abs(norm(nodes) - 1.0))
                if err > 1e-12:
                    raise InvalidInputError(f"sphere nodes off the unit sphere by {err:.2e}")
            nodes.setflags(write=False)
        if norm is not None and norm.kind == "euclidean" and ambient_dim and abs(Q - ambient_dim) > 1e-12:
            raise InvalidInputError("isotropic Euclidean models need Q = n")
        weights.setflags(write=False)
        self.Q = Q
        self.weights = weights
        self.nodes = nodes
        self.norm = norm
        self.ambient_dim = ambient_dim
        self.radial_only = radial_only
        self.label = label

    def __repr__(self):
        return (f"GroupModel(Q={self.Q}, nodes={self.n_nodes}, "
                f"|sphere|={self.sphere_measure:.12g}, label={self.label!r})")

    @property
    def sphere_measure(self):
        return float(np.sum(self.weights))

    @property
    def n_nodes(self):
        return self.weights.size

    @property
    def sphere_points(self):
        """Nodes if present, else column indices (passed to user callbacks)."""
        return self.nodes if self.nodes is not None else np.arange(self.n_nodes)

    @classmethod
    def euclidean(cls, n, p=2.0, resolution=16):
        norm = QuasiNormSpec("euclidean", p=p)
        nodes, weights = build_sphere_quadrature(norm, n, resolution)
        return cls(n, weights, nodes, norm, n, label=f"euclidean-l{p}-n{n}-r{resolution}")

    @classmethod
    def custom(cls, func, n, resolution=16):
        norm = QuasiNormSpec("custom", func=func)
        nodes, weights = build_sphere_quadrature(norm, n, resolution)
        return cls(n, weights, nodes, norm, n, label=f"custom-n{n}")

    @classmethod
    def abstract(cls, Q, sphere_measure, columns=1):
        """Radial-first model with any real ``Q``; columns split the measure."""
        if sphere_measure <= 0:
            raise InvalidInputError("sphere measure must be positive")
        w = np.full(columns, sphere_measure / columns)
        return cls(Q, w, label=f"abstract-Q{Q:g}")

    @classmethod
    def anisotropic(cls, nu, power, sphere_measure=None, samples=400_000, seed=0):
        """Radial-only model for an anisotropic power norm."""
        norm = QuasiNormSpec("anisotropic", nu=tuple(nu), power=power)
        Q = norm.homogeneous_dimension(len(nu))
        if sphere_measure is None:
            sphere_measure = anisotropic_sphere_measure(norm, len(nu), samples, seed)
        return cls(Q, [sphere_measure], None, norm, len(nu), radial_only=True,
                   label=f"anisotropic-nu{tuple(nu)}")

    def to_dict(self):
        d = {"Q": self.Q, "sphere_measure": self.sphere_measure, "nodes": self.n_nodes}
        if self.ambient_dim is not None:
            d["ambient_dim"] = self.ambient_dim
        if self.norm is not None:
            d["norm"] = self.norm.to_dict()
        return d


def quasi_norm(model, x):
    """Quasi-norm of an ambient point (or array of points, last axis)."""
    if model.ambient_dim is None or model.norm is None:
        raise InvalidInputError("model has no ambient coordinates")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("quasi_norm of a non-finite point")
    if x.shape[-1] != model.ambient_dim:
        raise InvalidInputError(f"expected {model.ambient_dim} coordinates")
    out = model.norm(x)
    return float(out) if np.ndim(out) == 0 else out


def _gauss_legendre(a, b, m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _project(norm, omega):
    nq = norm(omega)
    return omega / nq[:, None], nq


def build_sphere_quadrature(norm, n, resolution):
    """Nodes and weights on the unit quasi-sphere of an isotropic quasi-norm.

    Nodes are ``y = omega / |omega|`` for Euclidean unit vectors ``omega``,
    with weights ``w_euclid(omega) * |omega|^(-n)``: substituting
    ``x = rho * omega`` and ``r = rho |omega|`` in the Lebesgue integral gives
    ``d sigma(y) = |omega|^(-n) d omega``.

    n = 1: two nodes +-1.  n = 2: Gauss-Legendre on the eight arcs between
    multiples of pi/4 (the l^p norms are smooth there).  n = 3: Gauss-Legendre
    in cos(theta) times equispaced phi, except for the max-norm where each
    cube face gets a tensor Gauss-Legendre rule (there ``d sigma`` is the
    surface measure of the cube).
    """
    if not norm.isotropic:
        raise UnsupportedError(
            "sphere quadrature needs isotropic dilations; use a radial-only model "
            "(GroupModel.anisotropic) for anisotropic norms")
    if n not in (1, 2, 3):
        raise UnsupportedError(f"sphere quadrature implemented for n in {{1,2,3}}, got {n}")
    if resolution < 1:
        raise InvalidInputError("resolution must be positive")

    if n == 1:
        omega = np.array([[1.0], [-1.0]])
        y, nq = _project(norm, omega)
        return y, nq ** -1.0

    if n == 2:
        per_arc = max(1, -(-resolution // 8))
        th, wt = [], []
        for k in range(8):
            t, w = _gauss_legendre(k * math.pi / 4, (k + 1) * math.pi / 4, per_arc)
            th.append(t)
            wt.append(w)
        th = np.concatenate(th)
        wt = np.concatenate(wt)
        omega = np.column_stack([np.cos(th), np.sin(th)])
        y, nq = _project(norm, omega)
        return y, wt * nq ** -2.0

    if norm.kind == "euclidean" and math.isinf(norm.p):
        u, wu = np.polynomial.legendre.leggauss(resolution)
        U, V = np.meshgrid(u, u, indexing="ij")
        W = np.outer(wu, wu).ravel()
        faces, weights = [], []
        for axis in range(3):
            others = [a for a in range(3) if a != axis]
            for sign in (1.0, -1.0):
                pts = np.empty((U.size, 3))
                pts[:, axis] = sign
                pts[:, others[0]] = U.ravel()
                pts[:, others[1]] = V.ravel()
                faces.append(pts)
                weights.append(W)
        return np.vstack(faces), np.concatenate(weights)

    if not (norm.kind == "euclidean" and norm.p == 2.0):
        # |omega|_q has kinks on the coordinate planes; put them on panel edges
        m = max(2, -(-resolution // 2))
        th, wth = zip(*(_gauss_legendre(a, a + math.pi / 2, m) for a in (0.0, math.pi / 2)))
        ph, wph = zip(*(_gauss_legendre(k * math.pi / 2, (k + 1) * math.pi / 2, m)
                        for k in range(4)))
        th, wth, ph, wph = map(np.concatenate, (th, wth, ph, wph))
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        omega = np.column_stack([(np.sin(TH) * np.cos(PH)).ravel(),
                                 (np.sin(TH) * np.sin(PH)).ravel(), np.cos(TH).ravel()])
        w_e = np.outer(wth * np.sin(th), wph).ravel()
        y, nq = _project(norm, omega)
        return y, w_e * nq ** -3.0

    ct, wct = np.polynomial.legendre.leggauss(resolution)
    n_phi = 2 * resolution
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    CT, PHI = np.meshgrid(ct, phi, indexing="ij")
    ST = np.sqrt(1 - CT ** 2)
    omega = np.column_stack([(ST * np.cos(PHI)).ravel(), (ST * np.sin(PHI)).ravel(), CT.ravel()])
    w_e = np.repeat(wct, n_phi) * (2 * math.pi / n_phi)
    y, nq = _project(norm, omega)
    return y, w_e * nq ** -3.0


def anisotropic_sphere_measure(norm, n, samples=400_000, seed=0):
    """Monte Carlo estimate of ``|sphere| = Q |B(0,1)|`` for a power norm.

    The unit ball lies in ``[-1, 1]^n`` since every term of the power sum is
    at most one.
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(samples, n))
    inside = np.mean(norm(x) < 1.0)
    return norm.homogeneous_dimension(n) * inside * 2.0 ** n


def integrate_samples(model, grid, values):
    """Polar-coordinate integral of samples of shape ``(N, M)`` or ``(N,)``.

    A 1-D array is taken as radial (identical on every sphere node).
    """
    values = np.asarray(values)
    tw = grid.trapezoid_weights * np.exp(grid.s * model.Q)
    if values.ndim == 1:
        out = model.sphere_measure * (tw @ values)
    else:
        out = (tw @ values) @ model.weights
    return complex(out) if np.iscomplexobj(out) else float(out)


def polar_integrate(model, grid, integrand):
    """Integrate ``integrand(r, y)`` over the group in polar coordinates.

    ``r`` is passed with shape ``(N, 1)`` and ``y`` is the node array (or the
    column indices of an abstract model); the callback must return something
    broadcastable to ``(N, M)``.
    """
    r = grid.r[:, None]
    vals = np.broadcast_to(np.asarray(integrand(r, model.sphere_points)),
                           (grid.N, model.n_nodes))
    bad = ~np.isfinite(vals)
    if np.any(bad):
        j, i = np.argwhere(bad)[0]
        raise NumericError(f"non-finite integrand at s={grid.s[j]:.6g}, node {i}",
                           location=(float(grid.s[j]), int(i)))
    return integrate_samples(model, grid, vals)


def ball_volume(model, R):
    """Volume of the quasi-ball of radius ``R``: ``R^Q |sphere| / Q``."""
    if R < 0:
        raise InvalidInputError("radius must be non-negative")
    return R ** model.Q * model.sphere_measure / model.Q
