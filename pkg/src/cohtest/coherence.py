"""Coherence amplitude between two band representations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_index, check_same_shape
from .decompose import BandRep
from .exceptions import ShapeMismatch

EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class CoherenceSpectrum:
    values: np.ndarray
    band_centers_hz: np.ndarray
    eps_used: float = EPS


def tsum(a, axis=0):
    """Sum over ``axis`` with a rounding order independent of memory layout."""
    if axis != -1 and axis != a.ndim - 1:
        a = np.moveaxis(a, axis, -1)
    return np.ascontiguousarray(a).sum(axis=-1)


def coherence_values(x, y, eps=EPS, axis=0):
    """Coherence amplitude of complex arrays along ``axis`` (the time axis).

    ``|sum x y*| / max(sqrt(sum|x|^2 sum|y|^2), eps)``.  Works on any
    broadcastable shapes, e.g. (T, F) against (T, F, N) slices.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    cross = tsum(x * np.conj(y), axis)
    px = tsum(x.real**2 + x.imag**2, axis)
    py = tsum(y.real**2 + y.imag**2, axis)
    return np.abs(cross) / np.maximum(np.sqrt(px * py), eps)


def _check_pair(x: BandRep, y: BandRep):
    check_same_shape(x.coeffs, y.coeffs, ("x", "y"))
    if not np.allclose(x.band_centers_hz, y.band_centers_hz, rtol=0, atol=1e-12):
        raise ShapeMismatch("x and y have different band centers")


def coherence(x: BandRep, y: BandRep, eps: float = EPS) -> CoherenceSpectrum:
    _check_pair(x, y)
    return CoherenceSpectrum(
        values=coherence_values(x.coeffs, y.coeffs, eps),
        band_centers_hz=x.band_centers_hz.copy(),
        eps_used=eps,
    )


def coherence_at(x: BandRep, y: BandRep, band_index, eps: float = EPS) -> float:
    _check_pair(x, y)
    k = check_index(band_index, x.n_bands)
    return float(coherence_values(x.coeffs[:, k], y.coeffs[:, k], eps))
