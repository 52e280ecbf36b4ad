"""Analytic and random test fields.

All constructors take ``(model, grid, **params)`` and return a Field; the
names in :data:`CONSTRUCTORS` are the ones accepted in suite files.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .field import Field
from .inequalities import stubbe_extremizer

__all__ = [
    "CONSTRUCTORS",
    "build_field",
    "gaussian",
    "bump",
    "power_window",
    "exp_decay",
    "lognormal",
    "zero",
    "constant",
    "random_smooth",
    "random_corpus",
    "positive_corpus",
]


def gaussian(model, grid, width=1.0, amplitude=1.0):
    """``amplitude * exp(-(r/width)^2)``."""
    return Field.radial(model, grid, lambda r: amplitude * np.exp(-(r / width) ** 2),
                        {"ctor": "gaussian", "width": width})


def _bump_s(s, center, width):
    x = (np.asarray(s) - center) / width
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - x[inside] ** 2))
    return out


def bump(model, grid, center=0.0, width=1.0, amplitude=1.0):
    """Smooth bump in ``s = ln r``, supported in ``|s - center| < width``."""
    return Field.radial_from_s(model, grid, lambda s: amplitude * _bump_s(s, center, width),
                               {"ctor": "bump", "center": center, "width": width})


def power_window(model, grid, a=None, eps=0.0, width=4.0, center=None, amplitude=1.0):
    """``r^a`` times a Gaussian window ``exp(-(s - center)^2 / (2 width^2))``.

    ``a`` defaults to ``-(Q-2)/2 + eps``, the Hardy near-extremal exponent.
    """
    if a is None:
        a = -(model.Q - 2) / 2 + eps
    c = 0.5 * (grid.s_min + grid.s_max) if center is None else center
    return Field.radial_from_s(
        model, grid,
        lambda s: amplitude * np.exp(a * s - (s - c) ** 2 / (2 * width ** 2)),
        {"ctor": "power-window", "a": a, "width": width})


def exp_decay(model, grid, b=1.0, amplitude=1.0):
    """``amplitude * exp(-b r)``."""
    return Field.radial(model, grid, lambda r: amplitude * np.exp(-b * r),
                        {"ctor": "exp-decay", "b": b})


def lognormal(model, grid, center=0.0, width=1.0, amplitude=1.0):
    """Positive ``amplitude * exp(-(s - center)^2 / (2 width^2))``."""
    return Field.radial_from_s(
        model, grid, lambda s: amplitude * np.exp(-(s - center) ** 2 / (2 * width ** 2)),
        {"ctor": "lognormal", "center": center, "width": width})


def zero(model, grid):
    return Field(model, grid, np.zeros(grid.N), {"ctor": "zero"})


def constant(model, grid, value=1.0):
    return Field(model, grid, np.full(grid.N, float(value)), {"ctor": "constant"})


def bliss_extremizer(model, grid, delta=0.0, s0=0.0, width=1.0, amplitude=1.0):
    return stubbe_extremizer(model, grid, delta, s0, width, amplitude)


def _angular(model, rng):
    """Random low-order polynomial of the node coordinates (one value per node)."""
    if model.nodes is None:
        return 1.0 + 0.3 * rng.uniform(-1, 1, size=model.n_nodes)
    y = model.nodes
    d = y.shape[1]
    c = rng.normal(size=d) * 0.4
    B = rng.normal(size=(d, d)) * 0.2
    return 1.0 + y @ c + np.einsum("ij,jk,ik->i", y, B, y)


def random_smooth(model, grid, rng, radial=False, terms=3, span=None, complex_=False):
    """Sum of ``terms`` random bumps in ``s``, each with a random angular factor.

    The result vanishes near ``r = 0`` and ``r = inf`` (compact support in
    ``s``); ``span`` bounds the centers, default the middle half of the grid.
    """
    lo, hi = span or (0.75 * grid.s_min + 0.25 * grid.s_max, 0.25 * grid.s_min + 0.75 * grid.s_max)
    vals = np.zeros((grid.N, model.n_nodes), dtype=complex if complex_ else float)
    for _ in range(terms):
        c = rng.uniform(lo, hi)
        w = rng.uniform(0.8, 2.5)
        amp = rng.normal()
        if complex_:
            amp = amp + 1j * rng.normal()
        ang = np.ones(model.n_nodes) if radial else _angular(model, rng)
        vals += amp * _bump_s(grid.s, c, w)[:, None] * ang[None, :]
    return Field(model, grid, vals, {"ctor": "random-smooth", "radial": radial})


def random_corpus(model, grid, count, seed=0, radial=False, **kw):
    rng = np.random.default_rng(seed)
    return [random_smooth(model, grid, rng, radial=radial, **kw) for _ in range(count)]


def positive_corpus(model, grid, count, seed=0):
    """Strictly positive radial fields that stay above ``1e-300`` on the grid.

    Mixtures of log-normal profiles and rational decay ``(1 + (r/a)^2)^-k``
    with ``2k - Q`` large enough for integrability on the grid.
    """
    rng = np.random.default_rng(seed)
    span = grid.s_max - grid.s_min
    out = []
    for i in range(count):
        if i % 2 == 0:
            # width keeps exp(-(ds)^2 / (2 w^2)) above 1e-300 across the grid
            w = rng.uniform(max(0.6, span / 37.0), 2.5)
            c = rng.uniform(grid.s_min + 0.4 * span, grid.s_min + 0.7 * span)
            f = lognormal(model, grid, c, w, rng.uniform(0.5, 2.0))
        else:
            a = float(np.exp(rng.uniform(-1.0, 1.0)))
            k = 0.5 * model.Q + rng.uniform(2.0, 3.5)
            amp = rng.uniform(0.5, 2.0)
            f = Field.radial(model, grid, lambda r: amp * (1 + (r / a) ** 2) ** (-k),
                             {"ctor": "rational", "a": a, "k": k})
        out.append(f)
    return out


CONSTRUCTORS = {
    "gaussian": gaussian,
    "bump": bump,
    "power-window": power_window,
    "bliss-extremizer": bliss_extremizer,
    "exp-decay": exp_decay,
    "lognormal": lognormal,
    "zero": zero,
    "constant": constant,
}


def build_field(name, model, grid, **params):
    """Construct a named field; ``random-smooth`` takes ``seed`` and ``radial``."""
    if name == "random-smooth":
        rng = np.random.default_rng(params.pop("seed", 0))
        return random_smooth(model, grid, rng, **params)
    try:
        ctor = CONSTRUCTORS[name]
    except KeyError:
        raise InvalidInputError(
            f"unknown field constructor {name!r}; choose from "
            f"{sorted(CONSTRUCTORS) + ['random-smooth']}") from None
    return ctor(model, grid, **params)
