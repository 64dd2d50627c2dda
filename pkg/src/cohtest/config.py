"""Run configuration read from an INI file.

Every key is optional.  Defaults give the standard setup (B = 0.2 Hz,
bands over 0-1.2 Hz, n_perm = 2000) at a reduced sweep size of 100 targets,
so a bare ``cohtest simulate`` finishes quickly.

Example::

    [run]
    seed = 7
    output_dir = out

    [sweep]
    n_targets = 500

    [surrogate]
    n_perm = 2000
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .bench import BenchConfig
from .decompose import BandParams
from .exceptions import CohtestError
from .simulate import DriverSpec, SweepConfig


class ConfigError(CohtestError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    alpha: float = 0.05
    bin_width: float = 0.025
    control_freq_hz: float = 1.0
    axis: str = "observed"
    psd_segment_s: float = 20.0
    psd_overlap: float = 0.5

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0 < self.bin_width <= 1:
            raise ValueError(f"bin_width must lie in (0, 1], got {self.bin_width}")
        if self.axis not in ("observed", "true"):
            raise ValueError("axis must be 'observed' or 'true'")


@dataclass(frozen=True)
class RunConfig:
    driver: DriverSpec = field(default_factory=DriverSpec)
    bands: BandParams = field(default_factory=BandParams)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    n_perm: int = 2000
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    bench: BenchConfig = field(default_factory=BenchConfig)
    output_dir: Path = Path("out")
    threads: int = 1
    plus_one: bool = True  # surrogate p = (1 + count) / (n_perm + 1)

    def __post_init__(self):
        low, high = self.bands.range_hz
        if not low <= self.analysis.control_freq_hz <= high:
            raise ValueError(
                f"control_freq_hz {self.analysis.control_freq_hz} is outside [{low}, {high}]"
            )
        if self.n_perm < 1:
            raise ValueError("n_perm must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.bench.plus_one != self.plus_one:
            object.__setattr__(self, "bench", replace(self.bench, plus_one=self.plus_one))

    @property
    def seed(self) -> int:
        return self.sweep.seed

    def with_overrides(self, seed=None, out=None, threads=None, n_perm=None, alpha=None):
        cfg = self
        if seed is not None:
            cfg = replace(cfg, sweep=replace(cfg.sweep, seed=seed), bench=replace(cfg.bench, seed=seed))
        if out is not None:
            cfg = replace(cfg, output_dir=Path(out))
        if threads is not None:
            cfg = replace(cfg, threads=threads)
        if n_perm is not None:
            cfg = replace(cfg, n_perm=n_perm)
        if alpha is not None:
            cfg = replace(cfg, analysis=replace(cfg.analysis, alpha=alpha))
        return cfg


_KNOWN = {
    "run": {"seed", "output_dir", "threads"},
    "driver": {"source", "path", "duration_s", "fs_hz", "f_br_hz", "amp_jitter",
               "freq_jitter", "jitter_cutoff_hz"},
    "bands": {"bandwidth_hz", "range_low_hz", "range_high_hz", "upsample_fx", "taper",
              "rolloff", "spacing_hz"},
    "sweep": {"c_true_min", "c_true_max", "n_targets"},
    "surrogate": {"n_perm", "plus_one"},
    "analysis": {"alpha", "bin_width", "control_freq_hz", "axis", "psd_segment_s",
                 "psd_overlap"},
    "bench": {"n_coh_sub", "n_perm_grid", "repeats", "warmup", "bands"},
}


def _get(sec, key, conv, default):
    if sec is None or key not in sec:
        return default
    raw = sec[key].strip()
    try:
        return conv(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec.name}] {key} = {raw!r}: {exc}") from exc


def _seed(raw):
    v = int(raw, 0)
    if not 0 <= v < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return v


def _bool(raw):
    v = configparser.ConfigParser.BOOLEAN_STATES.get(raw.lower())
    if v is None:
        raise ValueError("expected true/false")
    return v


def _int_list(raw):
    return tuple(int(v) for v in raw.replace(",", " ").split())


def load_config(path=None) -> RunConfig:
    """Parse ``path`` (or return defaults when ``None``).

    Raises :class:`ConfigError` for a missing file, unknown sections or
    keys, unparsable values and failed validation.
    """
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        path = Path(path)
        try:
            with path.open(encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    for name in cp.sections():
        if name not in _KNOWN:
            raise ConfigError(f"unknown section [{name}]")
        extra = set(cp[name]) - _KNOWN[name]
        if extra:
            raise ConfigError(f"unknown keys in [{name}]: {sorted(extra)}")

    s = {name: (cp[name] if cp.has_section(name) else None) for name in _KNOWN}
    try:
        d0 = DriverSpec()
        driver = DriverSpec(
            source=_get(s["driver"], "source", str, d0.source),
            path=_get(s["driver"], "path", str, d0.path),
            duration_s=_get(s["driver"], "duration_s", float, d0.duration_s),
            fs_hz=_get(s["driver"], "fs_hz", float, d0.fs_hz),
            f_br_hz=_get(s["driver"], "f_br_hz", float, d0.f_br_hz),
            amp_jitter=_get(s["driver"], "amp_jitter", float, d0.amp_jitter),
            freq_jitter=_get(s["driver"], "freq_jitter", float, d0.freq_jitter),
            jitter_cutoff_hz=_get(s["driver"], "jitter_cutoff_hz", float, d0.jitter_cutoff_hz),
        )
        b0 = BandParams()
        bands = BandParams(
            bandwidth_hz=_get(s["bands"], "bandwidth_hz", float, b0.bandwidth_hz),
            range_hz=(
                _get(s["bands"], "range_low_hz", float, b0.range_hz[0]),
                _get(s["bands"], "range_high_hz", float, b0.range_hz[1]),
            ),
            upsample_fx=_get(s["bands"], "upsample_fx", int, b0.upsample_fx),
            taper=_get(s["bands"], "taper", str, b0.taper),
            rolloff=_get(s["bands"], "rolloff", float, b0.rolloff),
            spacing_hz=_get(s["bands"], "spacing_hz", float, b0.spacing_hz),
        )
        lo = _get(s["sweep"], "c_true_min", float, 0.001)
        hi = _get(s["sweep"], "c_true_max", float, 0.999)
        n = _get(s["sweep"], "n_targets", int, 100)
        if n < 1:
            raise ValueError("n_targets must be >= 1")
        sweep = SweepConfig(
            c_true_grid=np.linspace(lo, hi, n),
            seed=_get(s["run"], "seed", _seed, 0),
            band_params=bands,
        )
        bc0 = BenchConfig()
        bench = BenchConfig(
            n_coh_sub=_get(s["bench"], "n_coh_sub", int, bc0.n_coh_sub),
            n_perm_grid=_get(s["bench"], "n_perm_grid", _int_list, bc0.n_perm_grid),
            repeats=_get(s["bench"], "repeats", int, bc0.repeats),
            warmup=_get(s["bench"], "warmup", int, bc0.warmup),
            seed=sweep.seed,
            bands=_get(s["bench"], "bands", str, bc0.bands),
        )
        a0 = AnalysisConfig()
        analysis = AnalysisConfig(
            alpha=_get(s["analysis"], "alpha", float, a0.alpha),
            bin_width=_get(s["analysis"], "bin_width", float, a0.bin_width),
            control_freq_hz=_get(s["analysis"], "control_freq_hz", float, a0.control_freq_hz),
            axis=_get(s["analysis"], "axis", str, a0.axis),
            psd_segment_s=_get(s["analysis"], "psd_segment_s", float, a0.psd_segment_s),
            psd_overlap=_get(s["analysis"], "psd_overlap", float, a0.psd_overlap),
        )
        return RunConfig(
            driver=driver,
            bands=bands,
            sweep=sweep,
            n_perm=_get(s["surrogate"], "n_perm", int, 2000),
            analysis=analysis,
            bench=bench,
            output_dir=Path(_get(s["run"], "output_dir", str, "out")),
            threads=_get(s["run"], "threads", int, 1),
            plus_one=_get(s["surrogate"], "plus_one", _bool, True),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
