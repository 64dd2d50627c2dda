"""Estimator-style front ends for the coherence tests.

Both estimators take raw time series: ``fit(x, y)`` decomposes the driver
``x`` and the observation ``y`` into bands and tests every band.  Results
land in trailing-underscore attributes, as in scikit-learn.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .coherence import coherence
from .decompose import BandParams, Signal, decompose
from .glm import glm_spectrum
from .surrogate import SurrogateConfig, surrogate_spectrum


class _BandEstimator(BaseEstimator):
    def _params(self):
        return BandParams(
            bandwidth_hz=self.bandwidth_hz,
            range_hz=tuple(self.range_hz),
            upsample_fx=self.upsample_fx,
            taper=self.taper,
            rolloff=self.rolloff,
            spacing_hz=self.spacing_hz,
        )

    def _decompose(self, x, y):
        x = np.asarray(x, dtype=float).ravel()
        y = np.asarray(y, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError(f"x and y differ in length: {x.size} vs {y.size}")
        p = self._params()
        ax = decompose(Signal(x, self.fs_hz), p)
        ay = decompose(Signal(y, self.fs_hz), p)
        self.band_centers_hz_ = ax.band_centers_hz
        self.coherence_ = coherence(ax, ay).values
        return ax, ay

    def significant(self, alpha=0.05):
        """Boolean mask of bands with ``p < alpha``."""
        return self.p_values_ < alpha


class GLMCoherenceTest(_BandEstimator):
    """Closed-form test of coherence based on a complex linear model.

    After ``fit``: ``coherence_``, ``deviance_`` and ``p_values_`` hold one
    entry per band in ``band_centers_hz_``.
    """

    def __init__(self, fs_hz=250.0, bandwidth_hz=0.2, range_hz=(0.0, 1.2), upsample_fx=3,
                 taper="raised_cosine", rolloff=1.0, spacing_hz=None):
        self.fs_hz = fs_hz
        self.bandwidth_hz = bandwidth_hz
        self.range_hz = range_hz
        self.upsample_fx = upsample_fx
        self.taper = taper
        self.rolloff = rolloff
        self.spacing_hz = spacing_hz

    def fit(self, x, y):
        ax, ay = self._decompose(x, y)
        res = glm_spectrum(ax, ay)
        self.deviance_ = res.deviance
        self.p_values_ = res.p_value
        return self


class SurrogateCoherenceTest(_BandEstimator):
    """Resampling test of coherence (circular shift or phase randomisation)."""

    def __init__(self, method="phase_randomize", n_perm=2000, seed=0, threads=1, plus_one=True,
                 fs_hz=250.0, bandwidth_hz=0.2, range_hz=(0.0, 1.2), upsample_fx=3,
                 taper="raised_cosine", rolloff=1.0, spacing_hz=None):
        self.method = method
        self.n_perm = n_perm
        self.seed = seed
        self.threads = threads
        self.plus_one = plus_one
        self.fs_hz = fs_hz
        self.bandwidth_hz = bandwidth_hz
        self.range_hz = range_hz
        self.upsample_fx = upsample_fx
        self.taper = taper
        self.rolloff = rolloff
        self.spacing_hz = spacing_hz

    def fit(self, x, y):
        cfg = SurrogateConfig(self.method, self.n_perm, self.seed, self.plus_one)
        ax, ay = self._decompose(x, y)
        res = surrogate_spectrum(ax, ay, cfg, threads=self.threads)
        self.p_values_ = np.array([r.p_value for r in res])
        self.p_floor_ = cfg.floor
        return self
