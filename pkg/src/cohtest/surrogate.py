"""Surrogate (resampling) significance tests for coherence.

Surrogates are built from the driver representation only; the observation
is held fixed.  Two spectrum-preserving families are provided:

``circular_shift``
    rotate the time axis of a band by a lag drawn uniformly from
    ``{0, ..., T-1}``.
``phase_randomize``
    multiply every coefficient by an independent uniform unit phase.

The p-value is the upper-tail rank of the observed coherence among the
surrogate values, ``(1 + #{C_obs <= C_p}) / (n_perm + 1)`` by default.
Setting ``plus_one=False`` gives the plain average ``#{...} / n_perm``,
which can return 0.

Randomness: permutations are drawn in blocks of :data:`BLOCK` from
substreams keyed by ``(seed, method, realization, band, block)``, so a
band's null distribution does not depend on which other bands are tested
or how the work is split across threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from . import rng as _rng
from ._validation import check_index, check_positive_int
from .coherence import EPS, _check_pair, coherence_values
from .decompose import BandRep
from .exceptions import BadLag

METHODS = ("circular_shift", "phase_randomize")
BLOCK = 500
_STREAM_TAG = {"circular_shift": _rng.CIRC, "phase_randomize": _rng.PHASE}


@dataclass(frozen=True)
class SurrogateConfig:
    method: str = "phase_randomize"
    n_perm: int = 2000
    seed: int = 0
    plus_one: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        check_positive_int(self.n_perm, "n_perm")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def floor(self) -> float:
        return 1.0 / (self.n_perm + 1) if self.plus_one else 0.0


@dataclass(frozen=True)
class SurrogateTestResult:
    observed: float
    null_samples: np.ndarray
    p_value: float
    floor: float
    method: str = ""


def circ_shift(ax: BandRep, lag) -> BandRep:
    """Row ``t`` of the result is row ``(t + lag) mod T`` of ``ax``."""
    t = ax.n_times
    if isinstance(lag, (bool, np.bool_)) or int(lag) != lag or not 0 <= lag < t:
        raise BadLag(f"lag must be an integer in [0, {t}), got {lag!r}")
    return ax.with_coeffs(np.roll(ax.coeffs, -int(lag), axis=0))


def phase_randomize(ax: BandRep, rng: np.random.Generator) -> BandRep:
    theta = rng.uniform(0.0, 2 * np.pi, size=ax.coeffs.shape)
    return ax.with_coeffs(ax.coeffs * np.exp(1j * theta))


def _surrogate_block(x, method, gen, n):
    t = x.shape[0]
    if method == "circular_shift":
        lags = gen.integers(0, t, size=n)
        # row l of this read-only view over [x, x] is x rolled left by l
        d = np.concatenate([x, x[:-1]])
        step = d.strides[0]
        return as_strided(d, shape=(t, t), strides=(step, step), writeable=False)[lags]
    theta = gen.uniform(0.0, 2 * np.pi, size=(n, t))
    return x[None, :] * (np.cos(theta) + 1j * np.sin(theta))


def null_distribution(x, y, method, n_perm, seed, realization=0, band=0, eps=EPS):
    """Surrogate coherence values for one band (1-D columns ``x`` and ``y``)."""
    tag = _STREAM_TAG[method]
    out = np.empty(n_perm)
    for b, start in enumerate(range(0, n_perm, BLOCK)):
        n = min(BLOCK, n_perm - start)
        gen = _rng.substream(seed, tag, realization, band, b)
        surr = _surrogate_block(x, method, gen, n)
        out[start : start + n] = coherence_values(surr, y[None, :], eps, axis=1)
    return out


def empirical_pvalue(observed, null_samples, plus_one=True):
    count = int(np.count_nonzero(observed <= null_samples))
    n = len(null_samples)
    if plus_one:
        return (1 + count) / (n + 1)
    return count / n


def _band_test(x, y, k, cfg, realization, eps):
    # observed value through the same batched reduction used for surrogates
    observed = float(coherence_values(x[None, :], y[None, :], eps, axis=1)[0])
    null = null_distribution(x, y, cfg.method, cfg.n_perm, cfg.seed, realization, k, eps)
    return SurrogateTestResult(
        observed=observed,
        null_samples=null,
        p_value=empirical_pvalue(observed, null, cfg.plus_one),
        floor=cfg.floor,
        method=cfg.method,
    )


def surrogate_pvalue(
    ax: BandRep,
    ay: BandRep,
    band_index,
    cfg: SurrogateConfig,
    realization: int = 0,
    eps: float = EPS,
) -> SurrogateTestResult:
    _check_pair(ax, ay)
    k = check_index(band_index, ax.n_bands)
    return _band_test(
        np.ascontiguousarray(ax.coeffs[:, k]),
        np.ascontiguousarray(ay.coeffs[:, k]),
        k,
        cfg,
        realization,
        eps,
    )


def surrogate_spectrum(
    ax: BandRep,
    ay: BandRep,
    cfg: SurrogateConfig,
    realization: int = 0,
    bands=None,
    threads: int = 1,
    eps: float = EPS,
) -> list[SurrogateTestResult]:
    """Run :func:`surrogate_pvalue` for every band (or the listed ``bands``)."""
    _check_pair(ax, ay)
    ks = range(ax.n_bands) if bands is None else [check_index(k, ax.n_bands) for k in bands]
    xc = np.asfortranarray(ax.coeffs)
    yc = np.asfortranarray(ay.coeffs)

    def one(k):
        return _band_test(xc[:, k], yc[:, k], k, cfg, realization, eps)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(one, ks))
    return [one(k) for k in ks]


def surrogate_pvalues(ax, ay, cfg, realization=0, bands=None, threads=1):
    """Array of p-values from :func:`surrogate_spectrum`."""
    res = surrogate_spectrum(ax, ay, cfg, realization, bands, threads)
    return np.array([r.p_value for r in res])
