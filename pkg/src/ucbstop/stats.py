"""Standard-normal CDF, density and quantiles.

Scalars go through the active kernel backend (compiled when available);
arrays use the vectorized numpy path. Both share the same algorithm: the CDF
is evaluated on the smaller tail through ``erfc`` so tail masses keep full
relative precision, and quantiles start from Acklam's rational approximation
and take two Newton steps on the lower-tail CDF.
"""
from __future__ import annotations

import math

import numpy as np

from . import _core

__all__ = [
    "Probability",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_pdf",
    "std_normal_quantile",
    "std_normal_upper_quantile",
]


class Probability(float):
    """A float strictly inside (0, 1)."""

    def __new__(cls, value):
        value = float(value)
        if not (0.0 < value < 1.0):
            raise ValueError(f"probability must lie strictly in (0, 1), got {value!r}")
        return super().__new__(cls, value)


def _finite(x):
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"expected a finite real, got {x!r}")
    return x


def std_normal_cdf(x):
    """Phi(x). Accepts a scalar or an array."""
    if np.ndim(x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise ValueError("std_normal_cdf requires finite inputs")
        return _core.norm_cdf_array(x)
    return _core.norm_cdf(_finite(x))


def std_normal_sf(x):
    """Upper tail 1 - Phi(x), accurate when it is tiny."""
    if np.ndim(x):
        return std_normal_cdf(-np.asarray(x, dtype=float))
    return _core.norm_sf(_finite(x))


def std_normal_pdf(x):
    if np.ndim(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    return _core.norm_pdf(_finite(x))


def _check_open_unit(p):
    if np.ndim(p):
        p = np.asarray(p, dtype=float)
        if not np.all((p > 0.0) & (p < 1.0)):
            raise ValueError("probabilities must lie strictly in (0, 1)")
        return p
    return float(Probability(p))


def std_normal_quantile(p):
    """Inverse CDF: x with Phi(x) = p, for p in (0, 1)."""
    p = _check_open_unit(p)
    if np.ndim(p):
        return _core.norm_ppf_array(p)
    return _core.norm_ppf(p)


def std_normal_upper_quantile(q):
    """Inverse survival function: x with 1 - Phi(x) = q.

    Prefer this over ``std_normal_quantile(1 - q)`` for small ``q``; forming
    ``1 - q`` in floating point discards the tail mass.
    """
    q = _check_open_unit(q)
    if np.ndim(q):
        return _core.norm_isf_array(q)
    return _core.norm_isf(q)
