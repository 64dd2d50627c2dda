"""Simulated driver/observation pairs with a prescribed coherence.

The driver is either a synthetic respiration-like oscillation or a trace
loaded from CSV.  Observations are ``y = x + n`` with white Gaussian noise
scaled so that the coherence at the driver's peak band hits a target
value.  A sweep repeats this over a grid of targets and tests each
observation with the GLM and both surrogate methods.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import rng as _rng
from .coherence import coherence_values
from .decompose import BandParams, BandRep, Signal, band_power, decompose, peak_frequency
from .exceptions import BadTarget, DriverLoadError
from .glm import chi2_2_sf, glm_deviance_array
from .surrogate import SurrogateConfig, surrogate_pvalue


@dataclass(frozen=True)
class DriverSpec:
    """Where the driver comes from and, if synthetic, how it looks.

    The synthetic driver is ``a(t) * sin(phi(t))``.  Its instantaneous
    frequency is ``f_br * (1 + freq_jitter * s1(t))`` and its amplitude is
    ``exp(amp_jitter * s2(t))``, where ``s1`` and ``s2`` are independent
    unit-variance Gaussian processes band-limited to ``jitter_cutoff_hz``.
    The integrated frequency noise makes the phase drift like a random
    walk on time scales longer than ``1 / jitter_cutoff_hz``, while keeping
    the spectrum confined near ``f_br``.  The defaults give a regular,
    breathing-like rhythm whose band coefficients stay correlated over
    tens of seconds.
    """

    source: str = "synthetic"
    path: str | None = None
    duration_s: float = 367.0
    fs_hz: float = 250.0
    f_br_hz: float = 0.3
    amp_jitter: float = 0.3
    freq_jitter: float = 0.01
    jitter_cutoff_hz: float = 0.05

    def __post_init__(self):
        if self.source not in ("synthetic", "csv"):
            raise ValueError(f"source must be 'synthetic' or 'csv', got {self.source!r}")
        if self.source == "csv" and not self.path:
            raise ValueError("csv driver needs a path")
        if not self.fs_hz > 0:
            raise ValueError("fs_hz must be > 0")
        if self.source == "synthetic":
            if not self.duration_s > 0:
                raise ValueError("duration_s must be > 0")
            if not 0 < self.f_br_hz < self.fs_hz / 2:
                raise ValueError("f_br_hz must lie in (0, fs/2)")
        if self.amp_jitter < 0 or self.freq_jitter < 0:
            raise ValueError("jitters must be >= 0")


@dataclass(frozen=True)
class SweepConfig:
    c_true_grid: np.ndarray = field(default_factory=lambda: np.linspace(0.001, 0.999, 100))
    seed: int = 0
    band_params: BandParams = BandParams()

    def __post_init__(self):
        grid = np.asarray(self.c_true_grid, dtype=float).ravel()
        if grid.size == 0:
            raise ValueError("c_true_grid is empty")
        if np.any((grid <= 0) | (grid >= 1)):
            raise BadTarget("c_true values must lie strictly inside (0, 1)")
        if np.any(np.diff(grid) < 0):
            raise ValueError("c_true_grid must be sorted")
        object.__setattr__(self, "c_true_grid", grid)


@dataclass(frozen=True)
class SweepRecord:
    c_true: float
    sigma_n: float
    snr_db: float
    c_obs: float
    p_glm: float
    p_circ: float
    p_phase: float
    f_br_hz: float
    # same quantities at the control band (negatives for ROC)
    c_obs_ctrl: float = math.nan
    p_glm_ctrl: float = math.nan
    p_circ_ctrl: float = math.nan
    p_phase_ctrl: float = math.nan
    ctrl_hz: float = math.nan


SWEEP_COLUMNS = [f.name for f in fields(SweepRecord)]
REQUIRED_SWEEP_COLUMNS = SWEEP_COLUMNS[:8]


@dataclass
class SweepResult:
    records: list[SweepRecord]
    driver: Signal
    ax: BandRep
    f_br_index: int
    ctrl_index: int
    ay: np.ndarray | None = None


def _zscore(x):
    sd = x.std()
    return (x - x.mean()) / sd if sd > 0 else x - x.mean()


def _lowpass_noise(gen, n, fs, cutoff_hz):
    """Unit-variance Gaussian noise band-limited to ``cutoff_hz``."""
    white = gen.standard_normal(n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, 1 / fs)
    spec[freqs > cutoff_hz] = 0
    spec[0] = 0
    out = np.fft.irfft(spec, n)
    sd = out.std()
    return out / sd if sd > 0 else out


def load_driver_csv(path, fs_hz=None) -> Signal:
    """Read a driver trace from CSV.

    Accepts a ``time_s,value`` header, whose time column sets the sample
    rate (``fs_hz`` is then ignored), or a single ``value`` column, which
    needs ``fs_hz``.  The trace is returned z-scored.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            rows = [r for r in reader if r and any(c.strip() for c in r)]
    except (OSError, StopIteration, UnicodeDecodeError) as exc:
        raise DriverLoadError(f"cannot read driver file {path}: {exc}") from exc
    try:
        if header == ["time_s", "value"]:
            data = np.array([[float(a), float(b)] for a, b in rows])
            t, x = data[:, 0], data[:, 1]
            dt = np.diff(t)
            if dt.size == 0 or np.any(dt <= 0):
                raise DriverLoadError("time_s must be strictly increasing")
            fs_hz = 1.0 / float(np.median(dt))
        elif header == ["value"]:
            x = np.array([float(r[0]) for r in rows])
            if len(rows) and any(len(r) != 1 for r in rows):
                raise DriverLoadError("expected a single value column")
        else:
            raise DriverLoadError(f"unrecognised header {header}; want 'time_s,value' or 'value'")
    except (ValueError, IndexError) as exc:
        if isinstance(exc, DriverLoadError):
            raise
        raise DriverLoadError(f"malformed driver file {path}: {exc}") from exc
    if fs_hz is None:
        raise DriverLoadError("single-column driver needs fs_hz")
    if x.size < 2 or not np.all(np.isfinite(x)):
        raise DriverLoadError(f"driver file {path} has too few or non-finite samples")
    return Signal(_zscore(x), fs_hz)


def make_driver(spec: DriverSpec, rng: np.random.Generator) -> Signal:
    if spec.source == "csv":
        return load_driver_csv(spec.path, spec.fs_hz)
    fs = spec.fs_hz
    n = int(round(spec.duration_s * fs))
    inst_freq = np.full(n, spec.f_br_hz)
    if spec.freq_jitter > 0:
        s1 = _lowpass_noise(rng, n, fs, spec.jitter_cutoff_hz)
        inst_freq = inst_freq * (1 + spec.freq_jitter * s1)
    phase = 2 * np.pi * np.cumsum(inst_freq) / fs
    amp = np.ones(n)
    if spec.amp_jitter > 0:
        amp = np.exp(spec.amp_jitter * _lowpass_noise(rng, n, fs, spec.jitter_cutoff_hz))
    return Signal(_zscore(amp * np.sin(phase)), fs)


def noise_sigma(c_true, p_x, fs_hz, b_hz, u_fx, n) -> float:
    """Noise standard deviation that brings the peak-band coherence to ``c_true``.

    ``sqrt((1/c^2 - 1) * p_x * fs / (2 b) * (u_fx + 1) / n)``
    """
    if not 0 < c_true < 1:
        raise BadTarget(f"c_true must lie in (0, 1), got {c_true}")
    if not p_x > 0:
        raise ValueError(f"p_x must be > 0, got {p_x}")
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.sqrt((1 / c_true**2 - 1) * p_x * fs_hz / (2 * b_hz) * (u_fx + 1) / n)


def _effective_u(params: BandParams):
    # with a custom spacing, (u_fx + 1) is the number of bands per bandwidth
    return params.bandwidth_hz / params.spacing - 1


def make_observation(x: Signal, c_true, band_params: BandParams, rng, p_x=None):
    """Return ``(y, sigma_n, snr_db)`` for ``y = x + n``."""
    if p_x is None:
        rep = decompose(x, band_params)
        p_x = band_power(rep, peak_frequency(rep)[0])
    sigma = noise_sigma(
        c_true, p_x, x.fs_hz, band_params.bandwidth_hz, _effective_u(band_params), x.n
    )
    noise = rng.standard_normal(x.n) * sigma
    var_n = noise.var()
    snr_db = 10 * math.log10(x.samples.var() / var_n) if var_n > 0 else math.inf
    return Signal(x.samples + noise, x.fs_hz), sigma, snr_db


def _test_band(ax, ay, k, circ, phase, realization):
    xk = ax.coeffs[:, k]
    yk = ay.coeffs[:, k]
    c = float(coherence_values(xk, yk))
    p_glm = float(chi2_2_sf(glm_deviance_array(xk[:, None], yk[:, None])[0]))
    p_circ = surrogate_pvalue(ax, ay, k, circ, realization).p_value
    p_phase = surrogate_pvalue(ax, ay, k, phase, realization).p_value
    return c, p_glm, p_circ, p_phase


def run_sweep(
    spec: DriverSpec,
    cfg: SweepConfig,
    n_perm: int = 2000,
    control_freq_hz: float = 1.0,
    threads: int = 1,
    keep_tensors: bool = False,
    plus_one: bool = True,
) -> SweepResult:
    """One record per target in ``cfg.c_true_grid``, in grid order.

    ``plus_one`` picks the surrogate p-value form (see :class:`SurrogateConfig`).
    """
    params = cfg.band_params
    x = make_driver(spec, _rng.substream(cfg.seed, _rng.DRIVER))
    ax = decompose(x, params)
    k_br, f_br = peak_frequency(ax)
    k_ctrl = ax.nearest_band(control_freq_hz)
    p_x = band_power(ax, k_br)
    circ = SurrogateConfig("circular_shift", n_perm, cfg.seed, plus_one)
    phase = SurrogateConfig("phase_randomize", n_perm, cfg.seed, plus_one)

    def one(i):
        c_true = float(cfg.c_true_grid[i])
        y, sigma, snr = make_observation(
            x, c_true, params, _rng.substream(cfg.seed, _rng.NOISE, i), p_x=p_x
        )
        ay = decompose(y, params)
        hit = _test_band(ax, ay, k_br, circ, phase, i)
        ctrl = _test_band(ax, ay, k_ctrl, circ, phase, i)
        rec = SweepRecord(
            c_true, sigma, snr, hit[0], hit[1], hit[2], hit[3], f_br,
            ctrl[0], ctrl[1], ctrl[2], ctrl[3], float(ax.band_centers_hz[k_ctrl]),
        )
        return rec, (ay.coeffs if keep_tensors else None)

    idx = range(cfg.c_true_grid.size)
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            out = list(pool.map(one, idx))
    else:
        out = [one(i) for i in idx]
    records = [r for r, _ in out]
    ay = np.stack([a for _, a in out], axis=-1) if keep_tensors else None
    return SweepResult(records, x, ax, k_br, k_ctrl, ay)


def observation_tensor(spec: DriverSpec, cfg: SweepConfig, indices):
    """Driver coefficients and stacked observation coefficients ``(T, F, n)``.

    Observations for grid positions ``indices`` use the same random streams
    as :func:`run_sweep`, so they match the sweep's observations exactly.
    """
    params = cfg.band_params
    x = make_driver(spec, _rng.substream(cfg.seed, _rng.DRIVER))
    ax = decompose(x, params)
    p_x = band_power(ax, peak_frequency(ax)[0])
    ys = []
    for i in indices:
        y, _, _ = make_observation(
            x, float(cfg.c_true_grid[i]), params, _rng.substream(cfg.seed, _rng.NOISE, int(i)),
            p_x=p_x,
        )
        ys.append(decompose(y, params).coeffs)
    return ax, np.stack(ys, axis=-1)


def subsample_indices(n_total, n_sub):
    """``n_sub`` evenly spaced grid positions (all of them if ``n_sub >= n_total``)."""
    if n_sub >= n_total:
        return np.arange(n_total)
    return np.unique(np.round(np.linspace(0, n_total - 1, n_sub)).astype(int))


def _fmt(v):
    return repr(float(v))


def write_sweep_csv(records, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for r in records:
            w.writerow([_fmt(v) for v in asdict(r).values()])


def read_sweep_csv(path) -> list[SweepRecord]:
    """Parse a sweep CSV.  Raises ``ValueError`` on schema problems."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = reader.fieldnames or []
        missing = [c for c in REQUIRED_SWEEP_COLUMNS if c not in cols]
        if missing:
            raise ValueError(f"sweep CSV is missing columns {missing}")
        out = []
        for row in reader:
            vals = {c: float(row[c]) for c in SWEEP_COLUMNS if c in row and row[c] not in (None, "")}
            out.append(SweepRecord(**vals))
    return out
