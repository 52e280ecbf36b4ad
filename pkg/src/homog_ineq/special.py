"""Gamma function by the Lanczos approximation (g=7, 9 coefficients)."""

import math

import numpy as np

_G = 7
_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x):
    """Gamma function for real scalar or array input.

    Uses the reflection formula below 1/2. Poles (non-positive integers)
    return ``inf``.
    """
    arr = np.asarray(x, dtype=float)
    out = np.vectorize(_gamma_scalar, otypes=[float])(arr)
    return float(out) if out.ndim == 0 else out


def _gamma_scalar(x):
    if x <= 0 and x == math.floor(x):
        return math.inf
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * _gamma_scalar(1.0 - x))
    x -= 1.0
    a = _COEFFS[0]
    t = x + _G + 0.5
    for i in range(1, _G + 2):
        a += _COEFFS[i] / (x + i)
    return math.sqrt(2 * math.pi) * t ** (x + 0.5) * math.exp(-t) * a


def log_gamma(x):
    """log Gamma for x > 0, stable for large arguments."""
    if x <= 0:
        raise ValueError("log_gamma requires x > 0")
    if x < 0.5:
        return math.log(_gamma_scalar(x))
    x -= 1.0
    a = _COEFFS[0]
    t = x + _G + 0.5
    for i in range(1, _G + 2):
        a += _COEFFS[i] / (x + i)
    return 0.5 * math.log(2 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(a)
