"""Complex linear-model likelihood-ratio test for coherence.

For each band the observation coefficients ``y`` are regressed on the
driver coefficients ``x`` without intercept, ``y = beta x + e``.  The
deviance compares residual second moments under the null (``beta = 0``)
and full models, including the pseudo-covariance term that accounts for
improper (non-circular) residuals::

    G_k = sum |r_k|^2
    Q_k = sum r_k^2                  (complex square, not |r|^2)
    P_k = (G_k^2 - |Q_k|^2) / G_k
    D   = T * [log(G_0 / G_1) + log((P_0 + eps) / (P_1 + eps))]

``D`` is referred to chi-square with 2 degrees of freedom, whose survival
function is ``exp(-D / 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_complex_vector, check_same_shape
from .coherence import EPS, _check_pair, tsum
from .decompose import BandRep
from .exceptions import DegeneratePredictor, ShapeMismatch

DF = 2


@dataclass(frozen=True)
class GlmFit:
    beta: complex
    residuals_null: np.ndarray
    residuals_full: np.ndarray
    G0: float
    G1: float
    Q0: complex
    Q1: complex
    P0: float
    P1: float

    @property
    def n_times(self) -> int:
        return self.residuals_null.size


@dataclass(frozen=True)
class GlmTestResult:
    deviance: float
    p_value: float
    df: int = DF


def _moments(r):
    g = float(tsum(r.real**2 + r.imag**2))
    q = complex(tsum(r * r))
    p = (g * g - (q.real**2 + q.imag**2)) / g if g > 0 else 0.0
    return g, q, max(p, 0.0)


def fit(x, y) -> GlmFit:
    """Ordinary complex least-squares fit of ``y`` on ``x``."""
    x = check_complex_vector(x, "x")
    y = check_complex_vector(y, "y")
    check_same_shape(x, y)
    if x.size < 3:
        raise ShapeMismatch(f"need at least 3 samples, got {x.size}")
    sxx = tsum(x.real**2 + x.imag**2)
    if sxx == 0:
        raise DegeneratePredictor("predictor x is identically zero")
    # numpy division, so the result rounds like the vectorised path
    beta = complex(tsum(np.conj(x) * y) / sxx)
    r0 = y.copy()
    r1 = y - beta * x
    g0, q0, p0 = _moments(r0)
    g1, q1, p1 = _moments(r1)
    return GlmFit(beta, r0, r1, g0, g1, q0, q1, p0, p1)


def deviance(fit: GlmFit, n_times=None, eps: float = EPS) -> float:
    """Likelihood-ratio deviance of a fitted model.

    A perfect fit (``G1 == 0``) uses ``eps`` in place of ``G1`` so the result
    stays finite.  Values below zero (rounding) are clamped to 0.
    """
    t = fit.n_times if n_times is None else int(n_times)
    if t != fit.n_times:
        raise ShapeMismatch(f"T={t} does not match residual length {fit.n_times}")
    if fit.G0 == 0:
        return 0.0
    g1 = fit.G1 if fit.G1 > 0 else eps
    d = t * (np.log(fit.G0 / g1) + np.log((fit.P0 + eps) / (fit.P1 + eps)))
    return float(max(d, 0.0))


def chi2_2_sf(d):
    return np.exp(-0.5 * np.asarray(d, dtype=float))


def glm_pvalue(x, y, eps: float = EPS) -> GlmTestResult:
    f = fit(x, y)
    d = deviance(f, eps=eps)
    return GlmTestResult(deviance=d, p_value=float(chi2_2_sf(d)))


def glm_deviance_array(x, y, eps: float = EPS, axis=0):
    """Vectorised deviance along ``axis`` for broadcastable complex arrays.

    Entries whose predictor is all zero get ``D = 0``; use :func:`fit` when a
    degenerate predictor should raise instead.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    t = x.shape[axis]
    sxx = tsum(x.real**2 + x.imag**2, axis)
    sxy = tsum(np.conj(x) * y, axis)
    safe = np.where(sxx > 0, sxx, 1.0)
    beta = np.where(sxx > 0, sxy / safe, 0.0)
    r1 = y - np.expand_dims(beta, axis) * x

    def moments(r):
        g = tsum(r.real**2 + r.imag**2, axis)
        q = tsum(r * r, axis)
        gs = np.where(g > 0, g, 1.0)
        p = np.where(g > 0, (g * g - (q.real**2 + q.imag**2)) / gs, 0.0)
        return g, np.maximum(p, 0.0)

    g0, p0 = moments(y)
    g1, p1 = moments(r1)
    g1 = np.where(g1 > 0, g1, eps)
    with np.errstate(divide="ignore"):
        d = t * (np.log(np.where(g0 > 0, g0, 1.0) / g1) + np.log((p0 + eps) / (p1 + eps)))
    d = np.where((g0 > 0) & (sxx > 0), d, 0.0)
    return np.maximum(d, 0.0)


@dataclass(frozen=True)
class GlmSpectrum:
    deviance: np.ndarray
    p_value: np.ndarray
    band_centers_hz: np.ndarray
    df: int = DF

    def __getitem__(self, k) -> GlmTestResult:
        return GlmTestResult(float(self.deviance[k]), float(self.p_value[k]), self.df)

    def __len__(self):
        return self.deviance.size


def glm_spectrum(x: BandRep, y: BandRep, eps: float = EPS) -> GlmSpectrum:
    """Column-wise GLM test.  Bands with an all-zero predictor get p = 1."""
    _check_pair(x, y)
    d = glm_deviance_array(x.coeffs, y.coeffs, eps)
    return GlmSpectrum(d, chi2_2_sf(d), x.band_centers_hz.copy())
