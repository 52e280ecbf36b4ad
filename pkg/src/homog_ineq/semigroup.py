"""The Euler heat semigroup ``exp(-t E*E)`` and its line-side machinery.

``F f(s, y) = e^(sQ/2) f(e^s y)`` is an L^2 isometry onto the line
``R x sphere``; it conjugates the dilations ``U(t)`` to shifts in ``s`` and
the generator ``A = -iE - iQ/2`` to ``-i d/ds``. Because ``E*E = A^2 + Q^2/4``
the semigroup is ``e^(-tQ^2/4)`` times Gaussian convolution in ``s``.

Two routes are provided and kept independent: a direct quadrature of the
explicit kernel, and a Fourier multiplier on the line.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .errors import InvalidInputError, TruncationError, TruncationWarning
from .field import SPECTRAL_DECAY, Field, ds_apply, euler_apply

__all__ = [
    "LineField",
    "MellinSpectrum",
    "TimeGrid",
    "BesovResult",
    "to_line",
    "from_line",
    "dilate",
    "shift_line",
    "mellin",
    "generator_apply",
    "euler_heat_kernel",
    "euler_heat_spectral",
    "line_heat",
    "besov_norm",
]

KERNEL_CUTOFF = 10.0
LOST_MASS_WARN = 1e-12
LOST_L2_WARN = 1e-9


@dataclass(frozen=True, eq=False)
class LineField:
    """Samples of ``F f`` on the s-grid times the sphere nodes."""

    model: object
    grid: object
    values: np.ndarray

    def lp_norm(self, p):
        """Norm in ``L^p(R x sphere, ds dsigma)``."""
        a = np.abs(self.values) ** p
        return float(((self.grid.trapezoid_weights @ a) @ self.model.weights) ** (1.0 / p))

    def column_norms(self, p):
        """``||g(., y_i)||_{L^p(R)}`` for every node."""
        a = np.abs(self.values) ** p
        return (self.grid.trapezoid_weights @ a) ** (1.0 / p)

    def derivative(self, scheme="auto"):
        d, _ = ds_apply(self.values, self.grid.h, scheme)
        return LineField(self.model, self.grid, d)

    @property
    def boundary_decay(self):
        a = np.abs(self.values)
        peak = a.max()
        return 0.0 if peak == 0 else max(a[:2].max(), a[-2:].max()) / peak


@dataclass(frozen=True, eq=False)
class MellinSpectrum:
    """``(M f)(tau, y)`` on the ascending conjugate grid of ``s``."""

    tau: np.ndarray
    values: np.ndarray
    model: object = field(repr=False)

    @property
    def dtau(self):
        return float(self.tau[1] - self.tau[0])

    def l2_norm(self):
        a = np.abs(self.values) ** 2
        return float(np.sqrt(self.dtau * a.sum(axis=0) @ self.model.weights))


def to_line(f):
    return LineField(f.model, f.grid, f.values * np.exp(0.5 * f.model.Q * f.grid.s)[:, None])


def from_line(g, meta=None):
    return Field(g.model, g.grid, g.values * np.exp(-0.5 * g.model.Q * g.grid.s)[:, None], meta)


def _shift_rows(values, k):
    """``out[j] = values[j + k]`` with zero fill."""
    out = np.zeros_like(values)
    n = values.shape[0]
    if abs(k) >= n:
        return out
    if k >= 0:
        out[:n - k] = values[k:]
    else:
        out[-k:] = values[:n + k]
    return out


def shift_line(g, k):
    """Integer shift of a line field, ``g(s) -> g(s + k h)``."""
    return LineField(g.model, g.grid, _shift_rows(g.values, k))


def dilate(f, t):
    """``U(t) f(x) = e^(tQ/2) f(e^t x)``, i.e. ``F U(t) f (s) = F f (s + t)``.

    Shifts by a whole number of grid steps are exact (zero fill). Other
    shifts use Fourier interpolation, which needs a decaying line field; the
    interpolation is recorded in ``meta``.
    """
    k = t / f.grid.h
    kr = round(k)
    if kr == 0 and abs(k) < 1e-9:
        return f.with_values(f.values, dilation=t, interpolation="none")
    g = to_line(f)
    if abs(k - kr) < 1e-9:
        out = LineField(g.model, g.grid, _shift_rows(g.values, int(kr)))
        return from_line(out, dict(f.meta, dilation=t, interpolation="none"))
    if g.boundary_decay >= SPECTRAL_DECAY:
        raise TruncationError("non-integer dilation needs a decaying line field",
                              magnitude=g.boundary_decay)
    tau = 2 * np.pi * np.fft.fftfreq(f.grid.N, d=f.grid.h)
    vals = np.fft.ifft(np.exp(1j * tau * t)[:, None] * np.fft.fft(g.values, axis=0), axis=0)
    if not np.iscomplexobj(g.values):
        vals = vals.real
    return from_line(LineField(g.model, g.grid, vals),
                     dict(f.meta, dilation=t, interpolation="fourier"))


def mellin(f):
    """Mellin transform ``(1/sqrt(2 pi)) int e^(-i s tau) F f(s, y) ds`` by FFT."""
    g = to_line(f) if isinstance(f, Field) else f
    if g.boundary_decay >= SPECTRAL_DECAY:
        raise TruncationError("Mellin transform needs F f to decay at both grid ends",
                              magnitude=g.boundary_decay)
    grid = g.grid
    n, h = grid.N, grid.h
    tau = 2 * np.pi * np.fft.fftfreq(n, d=h)
    spec = np.fft.fft(g.values, axis=0) * (h / math.sqrt(2 * math.pi))
    spec *= np.exp(-1j * grid.s_min * tau)[:, None]
    return MellinSpectrum(np.fft.fftshift(tau), np.fft.fftshift(spec, axes=0), g.model)


def generator_apply(f, scheme="auto"):
    """``A f = -i E f - i (Q/2) f``."""
    ef = euler_apply(f, scheme)
    return ef.with_values(-1j * ef.values - 0.5j * f.model.Q * f.values)


def _lattice_mass(t, h):
    """``h * sum_m G_t(m h)`` over the integers (with the cutoff stencil)."""
    width = math.sqrt(2 * t)
    if width > 50 * h:
        return 1.0
    K = int(math.ceil(KERNEL_CUTOFF * width / h)) + 1
    m = np.arange(-K, K + 1)
    return float(h * np.exp(-(m * h) ** 2 / (4 * t)).sum() / math.sqrt(4 * math.pi * t))


def _check_time(t):
    if not (t > 0 and math.isfinite(t)):
        raise InvalidInputError(f"semigroup time must be positive, got {t}")


def euler_heat_kernel(f, t, cutoff=KERNEL_CUTOFF, block=512):
    """``exp(-t E*E) f`` by direct quadrature of the explicit kernel.

    The kernel ``e^(-tQ^2/4) (4 pi t)^(-1/2) r^(-Q/2) int exp(-(ln r - ln s)^2/4t)
    s^(-Q/2) f(s y) s^(Q-1) ds`` is evaluated on the log grid, where
    ``s^(-Q/2) f s^(Q-1) ds = F f ds'``. The Gaussian is truncated at
    ``cutoff * sqrt(2t)`` and the stencil is normalized by its lattice mass,
    which keeps the operator consistent when ``sqrt(2t)`` is below the grid
    spacing. Mass the stencil would pick up beyond the grid ends is estimated
    from the boundary samples and recorded as ``meta["lost_mass"]``.
    """
    _check_time(t)
    grid, Q = f.grid, f.model.Q
    n, h = grid.N, grid.h
    g = to_line(f).values
    K = min(int(math.floor(cutoff * math.sqrt(2 * t) / h)), n - 1)
    m = np.arange(-K, K + 1)
    kern = np.exp(-(m * h) ** 2 / (4 * t))
    kern *= h / math.sqrt(4 * math.pi * t) / _lattice_mass(t, h)

    out = np.zeros_like(g, dtype=np.result_type(g, float))
    for i0 in range(0, n, block):
        i1 = min(n, i0 + block)
        j0, j1 = max(0, i0 - K), min(n, i1 + K + 1)
        off = np.arange(i0, i1)[:, None] - np.arange(j0, j1)[None, :]
        W = np.where(np.abs(off) <= K, kern[np.clip(off + K, 0, 2 * K)], 0.0)
        out[i0:i1] = W @ g[j0:j1]

    csum = np.concatenate([[0.0], np.cumsum(kern)])
    idx = np.arange(n)
    # stencil mass that falls below index 0 or above n-1
    below = csum[np.clip(K - idx, 0, 2 * K + 1)]
    above = csum[-1] - csum[np.clip(n - idx + K, 0, 2 * K + 1)]
    peak = np.abs(g).max()
    lost = 0.0
    if peak > 0:
        left, right = np.abs(g[0]).max() / peak, np.abs(g[-1]).max() / peak
        lost = float(max((below * left).max(), (above * right).max()))
    if lost > LOST_MASS_WARN:
        warnings.warn(f"heat kernel lost mass {lost:.2e} beyond the grid", TruncationWarning,
                      stacklevel=2)
    out *= math.exp(-t * Q * Q / 4)
    return from_line(LineField(f.model, grid, out),
                     dict(f.meta, route="kernel", t=t, lost_mass=lost))


def euler_heat_spectral(f, t, cutoff=KERNEL_CUTOFF):
    """``exp(-t E*E) f`` as ``F^-1`` (Gaussian convolution by FFT) ``F``.

    The line field is zero-padded by ``cutoff * sqrt(2t)`` on each side
    before multiplying by ``exp(-t tau^2)``, so the convolution is linear
    (no wrap-around) like the kernel route. The fraction of the output that
    spreads beyond the grid is recorded as ``meta["lost_mass"]``.
    """
    _check_time(t)
    grid, Q = f.grid, f.model.Q
    n, h = grid.N, grid.h
    g = to_line(f).values
    pad = min(int(math.ceil(cutoff * math.sqrt(2 * t) / h)), 4 * n)
    L = next_fast_len(n + 2 * pad)
    tau = 2 * np.pi * np.fft.fftfreq(L, d=h)
    full = np.fft.ifft(np.exp(-t * tau ** 2)[:, None] * np.fft.fft(g, n=L, axis=0), axis=0)
    if not np.iscomplexobj(g):
        full = full.real
    out = full[:n]
    total = float(np.sum(np.abs(full) ** 2))
    lost = 0.0 if total == 0 else float(np.sqrt(max(total - np.sum(np.abs(out) ** 2), 0.0)
                                                 / total))
    if lost > LOST_L2_WARN:
        warnings.warn(f"spectral heat route: {lost:.2e} of the output left the grid",
                      TruncationWarning, stacklevel=2)
    out = out * math.exp(-t * Q * Q / 4)
    return from_line(LineField(f.model, grid, out), dict(f.meta, route="spectral", t=t,
                                                        lost_mass=lost))


class _LineHeat:
    """Linear (zero-extended) Gaussian convolution along ``s``, FFT based.

    The transform of the samples is computed once; each time ``t`` costs one
    kernel transform and one inverse transform.
    """

    def __init__(self, values, h):
        self.n = values.shape[0]
        self.h = h
        self.L = next_fast_len(2 * self.n)
        self.complex = np.iscomplexobj(values)
        m = np.arange(self.L)
        self.off = np.where(m < self.n, m, m - self.L).astype(float)
        self.valid = (m < self.n) | (m > self.L - self.n)
        if self.complex:
            self.spec = np.fft.fft(values, n=self.L, axis=0)
        else:
            self.spec = np.fft.rfft(values, n=self.L, axis=0)

    def __call__(self, t):
        _check_time(t)
        kern = np.where(self.valid, np.exp(-(self.off * self.h) ** 2 / (4 * t)), 0.0)
        kern *= self.h / math.sqrt(4 * math.pi * t) / _lattice_mass(t, self.h)
        if self.complex:
            out = np.fft.ifft(self.spec * np.fft.fft(kern)[:, None], axis=0)
        else:
            out = np.fft.irfft(self.spec * np.fft.rfft(kern)[:, None], n=self.L, axis=0)
        return out[:self.n]


def line_heat(g, t):
    """``F exp(-tA^2) F^-1 g`` on the grid samples, as a linear convolution.

    Values outside the grid are taken to be zero, so there is no wrap-around
    at any ``t``; this is the operator the Besov-type norm is built from.
    """
    return LineField(g.model, g.grid, _LineHeat(g.values, g.grid.h)(t))


@dataclass(frozen=True)
class TimeGrid:
    """Geometric times ``t_j = t_min * ratio^j``, ``j = 0..J``."""

    t_min: float = 1e-4
    ratio: float = 10 ** (1 / 20)
    J: int = 160

    def __post_init__(self):
        if not self.t_min > 0:
            raise InvalidInputError("TimeGrid needs t_min > 0")
        if not self.ratio > 1:
            raise InvalidInputError("TimeGrid needs ratio > 1")
        if self.J < 0:
            raise InvalidInputError("TimeGrid is empty")

    @property
    def times(self):
        return self.t_min * self.ratio ** np.arange(self.J + 1)

    def refine(self, factor):
        """Same span with ``factor`` times as many intervals."""
        return TimeGrid(self.t_min, self.ratio ** (1.0 / factor), self.J * factor)


@dataclass(frozen=True)
class BesovResult:
    value: float
    argmax_t: float
    at_endpoint: bool
    sup_refinement: float
    alpha: float

    def __float__(self):
        return self.value


def besov_norm(f, alpha, times=None):
    """``sup_t t^(-alpha/2) ||F exp(-tA^2) F^-1 (F f)||_inf`` over a time grid.

    ``f`` is a Field (its line image ``F f`` is used) or a LineField. The sup
    norm is over grid samples; ``sup_refinement`` is the change in the sup
    when every other sample is dropped, at the maximizing time.
    """
    if not alpha < 0:
        raise InvalidInputError(f"Besov exponent must be negative, got {alpha}")
    if times is None:
        times = TimeGrid()
    ts = np.asarray(times.times if isinstance(times, TimeGrid) else times, dtype=float)
    if ts.size == 0:
        raise InvalidInputError("empty time grid")
    g = to_line(f) if isinstance(f, Field) else f
    vals = g.values
    if not np.any(vals):
        return BesovResult(0.0, float(ts[0]), False, 0.0, alpha)
    if np.all(vals == vals[:, :1]):
        vals = vals[:, :1]
    heat = _LineHeat(vals, g.grid.h)
    best, best_j, best_refine = -1.0, 0, 0.0
    for j, t in enumerate(ts):
        a = np.abs(heat(t))
        val = t ** (-alpha / 2) * a.max()
        if val > best:
            best, best_j = val, j
            best_refine = t ** (-alpha / 2) * (a.max() - a[::2].max())
    at_end = best_j in (0, ts.size - 1)
    return BesovResult(float(best), float(ts[best_j]), bool(at_end), float(best_refine), alpha)
