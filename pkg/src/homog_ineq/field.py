"""Fields on the log-radial grid times the sphere nodes.

Since ``E = r d/dr = d/ds`` in ``s = ln r``, the Euler operator is a plain
derivative along the first axis of the sample matrix, applied column by
column, and ``R = e^(-s) d/ds``.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError, TruncationError
from .group_model import integrate_samples

__all__ = [
    "Field",
    "SPECTRAL_DECAY",
    "ds_apply",
    "euler_apply",
    "radial_derivative_apply",
    "euler_adjoint_apply",
    "lp_norm",
    "integral",
    "inner_product",
    "radialize",
    "sphere_mean",
    "signed_power",
]

# relative boundary magnitude below which the periodic (Fourier) derivative is used
SPECTRAL_DECAY = 1e-10


class Field:
    """Samples of a function on ``grid.N`` log-radii times the sphere nodes.

    ``values`` has shape ``(N, M)``; a 1-D array is read as a radial profile
    and replicated across the sphere columns. Instances are immutable.
    """

    __array_priority__ = 100

    def __init__(self, model, grid, values, meta=None):
        vals = np.array(values, dtype=complex if np.iscomplexobj(values) else float)
        if vals.ndim == 1:
            vals = np.repeat(vals[:, None], model.n_nodes, axis=1)
        if vals.shape != (grid.N, model.n_nodes):
            raise InvalidInputError(
                f"field shape {vals.shape} does not match grid x sphere "
                f"({grid.N}, {model.n_nodes})")
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("field samples must be finite")
        vals.setflags(write=False)
        self.model = model
        self.grid = grid
        self.values = vals
        self.meta = dict(meta or {})

    @classmethod
    def from_function(cls, model, grid, func, meta=None):
        """Sample ``func(r, y)`` with ``r`` of shape ``(N, 1)``."""
        r = grid.r[:, None]
        vals = np.broadcast_to(np.asarray(func(r, model.sphere_points)),
                               (grid.N, model.n_nodes))
        return cls(model, grid, vals, meta)

    @classmethod
    def radial(cls, model, grid, profile, meta=None):
        """Radial field from a profile of ``r``."""
        return cls(model, grid, np.asarray(profile(grid.r)), meta)

    @classmethod
    def radial_from_s(cls, model, grid, profile, meta=None):
        """Radial field from a profile of the log-radius ``s``."""
        return cls(model, grid, np.asarray(profile(grid.s)), meta)

    @property
    def s(self):
        return self.grid.s

    @property
    def r(self):
        return self.grid.r

    @property
    def is_complex(self):
        return np.iscomplexobj(self.values)

    @property
    def is_radial(self):
        v = self.values
        return bool(np.all(v == v[:, :1]))

    @property
    def profile(self):
        """First column; the radial profile for radial fields."""
        return self.values[:, 0]

    @property
    def boundary_values(self):
        """Max ``|f|`` over the outermost two samples at each end."""
        a = np.abs(self.values)
        return float(a[:2].max()), float(a[-2:].max())

    @property
    def boundary_decay(self):
        """Boundary magnitude relative to the field maximum."""
        peak = float(np.abs(self.values).max())
        if peak == 0.0:
            return 0.0
        return max(self.boundary_values) / peak

    def with_values(self, values, **meta):
        m = dict(self.meta)
        m.update(meta)
        return Field(self.model, self.grid, values, m)

    def coarsen(self):
        return Field(self.model, self.grid.coarsen(), self.values[::2], self.meta)

    def real(self):
        return self.with_values(self.values.real)

    def __neg__(self):
        return self.with_values(-self.values)

    def _other(self, other):
        if isinstance(other, Field):
            if other.grid != self.grid or other.model is not self.model:
                raise InvalidInputError("fields live on different grids or models")
            return other.values
        return other

    def __add__(self, other):
        return self.with_values(self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self.with_values(self.values - self._other(other))

    def __mul__(self, other):
        return self.with_values(self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self.with_values(self.values / self._other(other))

    def __repr__(self):
        return (f"Field(N={self.grid.N}, nodes={self.model.n_nodes}, "
                f"radial={self.is_radial}, decay={self.boundary_decay:.1e})")


def _fd4(v, h):
    d = np.empty_like(v)
    d[2:-2] = (-v[4:] + 8 * v[3:-1] - 8 * v[1:-3] + v[:-4]) / (12 * h)
    d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
    d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    d[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12 * h)
    d[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12 * h)
    return d


def _spectral(v, h):
    n = v.shape[0]
    k = 2 * np.pi * np.fft.fftfreq(n, d=h)
    if n % 2 == 0:
        k[n // 2] = 0.0
    d = np.fft.ifft(1j * k[:, None] * np.fft.fft(v, axis=0), axis=0)
    return d if np.iscomplexobj(v) else d.real


HYBRID_LEVEL = 1e-6


def _hybrid(v, h):
    """Spectral where the derivative is within ``HYBRID_LEVEL`` of its column
    peak, fourth-order differences elsewhere.

    FFT round-off is a uniform absolute error of order ``eps * max|v|``;
    in the far tails it would dominate, and exponentially growing weights
    (``e^s`` in ``int |R f|^2``) would amplify it. The local stencil has no
    such floor.
    """
    sp, fd = _spectral(v, h), _fd4(v, h)
    peak = np.abs(fd).max(axis=0, keepdims=True)
    return np.where(np.abs(fd) >= HYBRID_LEVEL * peak, sp, fd)


def ds_apply(values, h, scheme="auto", decay=None):
    """Derivative along axis 0. Returns ``(derivative, scheme_used)``.

    ``scheme`` is ``"spectral"``, ``"fd4"``, ``"hybrid"`` or ``"auto"``
    (hybrid when the relative boundary magnitude ``decay`` is below
    ``SPECTRAL_DECAY``, otherwise fd4).
    """
    values = np.asarray(values)
    if decay is None:
        peak = np.abs(values).max()
        ends = max(np.abs(values[:2]).max(), np.abs(values[-2:]).max())
        decay = 0.0 if peak == 0 else ends / peak
    if scheme == "auto":
        scheme = "hybrid" if decay < SPECTRAL_DECAY else "fd4"
    if scheme in ("spectral", "hybrid"):
        if decay >= SPECTRAL_DECAY:
            raise TruncationError(
                f"spectral derivative needs boundary decay < {SPECTRAL_DECAY:g}, "
                f"measured {decay:.3e}", magnitude=decay)
        v2 = values if values.ndim == 2 else values[:, None]
        d = _spectral(v2, h) if scheme == "spectral" else _hybrid(v2, h)
        return (d if values.ndim == 2 else d[:, 0]), scheme
    if scheme == "fd4":
        return _fd4(values, h), scheme
    raise InvalidInputError(f"unknown derivative scheme {scheme!r}")


def euler_apply(f, scheme="auto"):
    """``E f = d f / ds`` on every sphere column."""
    d, used = ds_apply(f.values, f.grid.h, scheme, f.boundary_decay)
    return f.with_values(d, scheme=used)


def radial_derivative_apply(f, scheme="auto"):
    """``R f = e^(-s) E f``."""
    ef = euler_apply(f, scheme)
    return ef.with_values(ef.values * np.exp(-f.grid.s)[:, None])


def euler_adjoint_apply(f, scheme="auto"):
    """Formal adjoint ``E* f = -Q f - E f``."""
    ef = euler_apply(f, scheme)
    return ef.with_values(-f.model.Q * f.values - ef.values)


def _weight_values(f, weight):
    if weight is None:
        return 1.0
    w = np.asarray(weight(f.grid.r[:, None], f.model.sphere_points))
    return np.broadcast_to(w, f.values.shape)


def integral(f, weight=None):
    """``int_G weight * f dx``."""
    return integrate_samples(f.model, f.grid, _weight_values(f, weight) * f.values)


def lp_norm(f, p, weight=None):
    """``(int weight |f|^p dx)^(1/p)``."""
    if not p >= 1:
        raise InvalidInputError(f"lp_norm needs p >= 1, got {p}")
    val = integrate_samples(f.model, f.grid, _weight_values(f, weight) * np.abs(f.values) ** p)
    return max(val, 0.0) ** (1.0 / p)


def inner_product(f, g):
    """``<f, g> = int f conj(g) dx``."""
    if f.grid != g.grid or f.model is not g.model:
        raise InvalidInputError("fields live on different grids or models")
    return integrate_samples(f.model, f.grid, f.values * np.conj(g.values))


def radialize(f, p):
    """L^p spherical mean ``(|sphere|^-1 sum_i w_i |f(r y_i)|^p)^(1/p)``."""
    if not p >= 1:
        raise InvalidInputError(f"radialize needs p >= 1, got {p}")
    w = f.model.weights
    a = np.abs(f.values)
    # scale each row by its max so |f|^p does not underflow
    top = a.max(axis=1)
    safe = np.where(top > 0, top, 1.0)
    prof = top * ((a / safe[:, None]) ** p @ w / w.sum()) ** (1.0 / p)
    return Field(f.model, f.grid, prof, {"radialized": p})


def sphere_mean(f):
    """Arithmetic mean over the sphere, ``|sphere|^-1 sum_i w_i f(r y_i)``."""
    w = f.model.weights
    return Field(f.model, f.grid, f.values @ w / w.sum(), {"sphere_mean": True})


def signed_power(values, p):
    """``|v|^(p-2) v`` with the value 0 at v = 0."""
    values = np.asarray(values)
    a = np.abs(values)
    out = np.zeros_like(values)
    nz = a > 0
    out[nz] = a[nz] ** (p - 2) * values[nz]
    return out
