"""Filter-bank decomposition of a real signal into complex narrowband bands.

The decomposition works on the full-signal FFT.  Each band takes the
one-sided spectrum around its center bin, applies a frequency taper,
demodulates to baseband and inverse transforms to a complex series sampled
at ``T = floor(2 * B * duration)`` points, i.e. at a rate of about ``2B``.

Conventions
-----------
* ``B`` (``bandwidth_hz``) is the half-power half-width of a band: the taper
  passes ``f_k +/- B`` at half power.  The taper is power complementary with
  period equal to the sample rate, so white noise yields white, independent
  coefficients within every interior band.
* Coefficients are scaled so that band powers (mean ``|a_t|**2`` over time)
  partition signal energy: summed over bands on the default grid they
  equal ``sum(x**2)`` for components well inside ``[low, high]``.  Edge bands
  lose the parts of their taper that fall below 0 Hz or outside the grid.
* No padding: the FFT length is the signal length.  Padding to a fast
  length would change the bin grid and break the exact whiteness above.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_index
from .exceptions import BadIndex, InvalidBandRange, NoPeak, SignalTooShort

TAPERS = ("raised_cosine", "rectangular")


@dataclass(frozen=True)
class BandParams:
    """Filter-bank parameters.

    ``spacing_hz`` overrides the default center spacing ``B / (U_fx + 1)``.
    ``rolloff`` is the fraction of the band half-width used by the raised
    cosine transition (ignored for the rectangular taper).
    """

    bandwidth_hz: float = 0.2
    range_hz: tuple[float, float] = (0.0, 1.2)
    upsample_fx: int = 3
    taper: str = "raised_cosine"
    rolloff: float = 1.0
    spacing_hz: float | None = None

    def __post_init__(self):
        if not self.bandwidth_hz > 0:
            raise ValueError(f"bandwidth_hz must be > 0, got {self.bandwidth_hz}")
        low, high = (float(v) for v in self.range_hz)
        if not (low >= 0 and high > low):
            raise InvalidBandRange(f"need high > low >= 0, got [{low}, {high}]")
        object.__setattr__(self, "range_hz", (low, high))
        if int(self.upsample_fx) != self.upsample_fx or self.upsample_fx < 1:
            raise ValueError(f"upsample_fx must be an integer >= 1, got {self.upsample_fx}")
        if self.taper not in TAPERS:
            raise ValueError(f"taper must be one of {TAPERS}, got {self.taper!r}")
        if not 0 < self.rolloff <= 1:
            raise ValueError(f"rolloff must lie in (0, 1], got {self.rolloff}")
        if self.spacing_hz is not None and not self.spacing_hz > 0:
            raise ValueError(f"spacing_hz must be > 0, got {self.spacing_hz}")

    @property
    def spacing(self) -> float:
        if self.spacing_hz is not None:
            return float(self.spacing_hz)
        return self.bandwidth_hz / (self.upsample_fx + 1)

    def nominal_centers(self) -> np.ndarray:
        low, high = self.range_hz
        n = int(np.floor((high - low) / self.spacing + 1e-9))
        return low + self.spacing * np.arange(n + 1)


@dataclass(frozen=True)
class Signal:
    samples: np.ndarray
    fs_hz: float

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=float)
        if x.ndim != 1:
            raise ValueError(f"samples must be one-dimensional, got shape {x.shape}")
        if x.size < 2:
            raise SignalTooShort("a signal needs at least 2 samples")
        if not np.all(np.isfinite(x)):
            raise ValueError("samples contain non-finite values")
        if not self.fs_hz > 0:
            raise ValueError(f"fs_hz must be > 0, got {self.fs_hz}")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "fs_hz", float(self.fs_hz))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.fs_hz


@dataclass(frozen=True)
class BandRep:
    """T x F complex coefficients with their band centers and sample interval."""

    coeffs: np.ndarray
    band_centers_hz: np.ndarray
    dt_s: float
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2:
            raise ValueError(f"coeffs must be T x F, got shape {c.shape}")
        f = np.atleast_1d(np.asarray(self.band_centers_hz, dtype=float))
        if f.shape != (c.shape[1],):
            raise ValueError(
                f"{c.shape[1]} bands but {f.size} band centers supplied"
            )
        if c.shape[0] < 2:
            raise SignalTooShort(f"need at least 2 time rows, got {c.shape[0]}")
        if np.any(np.diff(f) <= 0):
            raise ValueError("band_centers_hz must be strictly increasing")
        if not np.all(np.isfinite(c)):
            raise ValueError("coeffs contain non-finite values")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "band_centers_hz", f)

    @property
    def n_times(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_bands(self) -> int:
        return self.coeffs.shape[1]

    def nearest_band(self, freq_hz: float) -> int:
        return int(np.argmin(np.abs(self.band_centers_hz - freq_hz)))

    def with_coeffs(self, coeffs) -> "BandRep":
        return BandRep(coeffs, self.band_centers_hz, self.dt_s, self.meta)


def taper_weights(offsets, n_times, taper="raised_cosine", rolloff=1.0):
    """Amplitude taper at integer bin ``offsets`` from the band center.

    Offsets are in FFT bins; one period of the output sample rate spans
    ``n_times`` bins.  ``|w|**2`` summed over offsets congruent modulo
    ``n_times`` is exactly 1.
    """
    u = np.abs(np.asarray(offsets, dtype=float)) / n_times
    if taper == "rectangular":
        m = np.asarray(offsets)
        lo = -(n_times // 2)
        return ((m >= lo) & (m < lo + n_times)).astype(float)
    inner = (1.0 - rolloff) / 2
    outer = (1.0 + rolloff) / 2
    w2 = np.where(u <= inner, 1.0, 0.0)
    ramp = (u > inner) & (u < outer)
    w2 = np.where(ramp, np.cos(np.pi * (u - inner) / (2 * rolloff)) ** 2, w2)
    return np.sqrt(w2)


def n_time_rows(n_samples, fs_hz, bandwidth_hz):
    return int(np.floor(2 * bandwidth_hz * n_samples / fs_hz))


def _unitary_onesided(x):
    n = x.size
    spec = scipy.fft.rfft(x) * np.sqrt(2.0 / n)
    spec[0] /= np.sqrt(2.0)
    if n % 2 == 0:
        spec[-1] /= np.sqrt(2.0)
    return spec


def decompose(signal: Signal, params: BandParams = BandParams()) -> BandRep:
    """Decompose ``signal`` into a :class:`BandRep`.

    Raises
    ------
    SignalTooShort
        If ``bandwidth * duration < 2`` or bands cannot be resolved.
    InvalidBandRange
        If the band range exceeds the Nyquist frequency.
    """
    if not isinstance(signal, Signal):
        raise TypeError("decompose expects a Signal")
    fs = signal.fs_hz
    n = signal.n
    b = params.bandwidth_hz
    if b * signal.duration_s < 2:
        raise SignalTooShort(
            f"bandwidth {b} Hz x duration {signal.duration_s:.3g} s < 2"
        )
    low, high = params.range_hz
    if high > fs / 2:
        raise InvalidBandRange(f"range upper edge {high} Hz exceeds Nyquist {fs / 2} Hz")

    n_t = n_time_rows(n, fs, b)
    df = fs / n
    centers_bin = np.rint(params.nominal_centers() / df).astype(int)
    if np.any(np.diff(centers_bin) <= 0):
        raise SignalTooShort(
            f"band spacing {params.spacing:.4g} Hz is finer than the frequency "
            f"resolution {df:.4g} Hz of a {signal.duration_s:.4g} s signal"
        )

    spec = _unitary_onesided(signal.samples)
    if params.taper == "rectangular":
        half = n_t // 2 + 1
    else:
        half = int(np.ceil(n_t * (1 + params.rolloff) / 2)) + 1
    n_fold = int(np.ceil((2 * half + 1) / n_t))
    offsets = np.arange(-half, -half + n_fold * n_t)
    w = taper_weights(offsets, n_t, params.taper, params.rolloff)
    # energy partition: sum_k |w_k|^2 = 1 at bin spacing `spacing / df`
    w = w / np.sqrt(n_t * df / params.spacing)

    idx = centers_bin[:, None] + offsets[None, :]
    valid = (idx >= 0) & (idx < spec.size)
    gathered = np.where(valid, spec[np.clip(idx, 0, spec.size - 1)], 0.0) * w
    folded = gathered.reshape(centers_bin.size, n_fold, n_t).sum(axis=1)
    # column q of `folded` holds offset (q - half) mod n_t; roll so column 0 is offset 0
    folded = np.roll(folded, -half % n_t, axis=1)
    coeffs = scipy.fft.ifft(folded, axis=1) * n_t

    return BandRep(
        coeffs=coeffs.T,
        band_centers_hz=centers_bin * df,
        dt_s=signal.duration_s / n_t,
        meta={"params": params, "fs_hz": fs, "n_samples": n},
    )


def band_power(rep: BandRep, band_index) -> float:
    """Mean squared magnitude over time of one band."""
    k = check_index(band_index, rep.n_bands)
    col = rep.coeffs[:, k]
    return float(np.mean(col.real**2 + col.imag**2))


def band_powers(rep: BandRep) -> np.ndarray:
    c = rep.coeffs
    return np.mean(c.real**2 + c.imag**2, axis=0)


def peak_frequency(rep: BandRep) -> tuple[int, float]:
    """Band with the largest mean power; ties resolve to the lowest index."""
    if rep.n_bands == 0:
        raise BadIndex("empty band representation")
    power = band_powers(rep)
    if not np.any(power > 0):
        raise NoPeak("all bands have zero power")
    k = int(np.argmax(power))
    return k, float(rep.band_centers_hz[k])


class BandTransformer(TransformerMixin, BaseEstimator):
    """Scikit-learn style wrapper around :func:`decompose`.

    ``transform`` takes one signal (1-D) or a batch of equal-length signals
    (2-D, one per row) and returns the coefficient array of shape (T, F) or
    (n_signals, T, F).
    """

    def __init__(
        self,
        fs_hz=250.0,
        bandwidth_hz=0.2,
        range_hz=(0.0, 1.2),
        upsample_fx=3,
        taper="raised_cosine",
        rolloff=1.0,
        spacing_hz=None,
    ):
        self.fs_hz = fs_hz
        self.bandwidth_hz = bandwidth_hz
        self.range_hz = range_hz
        self.upsample_fx = upsample_fx
        self.taper = taper
        self.rolloff = rolloff
        self.spacing_hz = spacing_hz

    def _band_params(self):
        return BandParams(
            bandwidth_hz=self.bandwidth_hz,
            range_hz=tuple(self.range_hz),
            upsample_fx=self.upsample_fx,
            taper=self.taper,
            rolloff=self.rolloff,
            spacing_hz=self.spacing_hz,
        )

    def fit(self, X, y=None):
        self.params_ = self._band_params()
        X = np.atleast_2d(np.asarray(X, dtype=float))
        rep = decompose(Signal(X[0], self.fs_hz), self.params_)
        self.band_centers_ = rep.band_centers_hz
        self.dt_s_ = rep.dt_s
        self.n_samples_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.n_samples_:
            raise ValueError(
                f"fitted on signals of length {self.n_samples_}, got {X.shape[1]}"
            )
        out = np.stack([decompose(Signal(x, self.fs_hz), self.params_).coeffs for x in X])
        return out[0] if single else out
