"""Wall-clock comparison of the GLM test against the surrogate tests.

All three methods run on the same precomputed band coefficients; only the
test itself (including surrogate generation) is inside the timed region.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .coherence import coherence_values
from .exceptions import InsufficientData
from .glm import chi2_2_sf, glm_deviance_array
from .surrogate import SurrogateConfig, empirical_pvalue, null_distribution

BENCH_METHODS = ("glm", "circular_shift", "phase_randomize")
MIN_REPEATS = 3


@dataclass(frozen=True)
class BenchConfig:
    n_coh_sub: int = 100
    n_perm_grid: tuple = (100, 200, 500, 1000, 2000, 4000)
    repeats: int = 10
    warmup: int = 1
    seed: int = 0
    bands: str = "peak"
    plus_one: bool = True

    def __post_init__(self):
        if self.repeats < MIN_REPEATS:
            raise ValueError(f"repeats must be >= {MIN_REPEATS}, got {self.repeats}")
        if self.warmup < 1:
            raise ValueError("warmup must be >= 1")
        if self.n_coh_sub < 1:
            raise ValueError("n_coh_sub must be >= 1")
        grid = tuple(int(n) for n in self.n_perm_grid)
        if not grid or any(n < 1 for n in grid):
            raise ValueError("n_perm_grid must hold positive integers")
        object.__setattr__(self, "n_perm_grid", grid)
        if self.bands not in ("peak", "all"):
            raise ValueError("bands must be 'peak' or 'all'")


@dataclass(frozen=True)
class BenchSample:
    method: str
    n_perm: int
    repeat: int
    seconds: float


@dataclass(frozen=True)
class BenchSummaryRow:
    method: str
    n_perm: int | None  # None for GLM, which has no permutations
    setting: int
    median_s: float
    std_s: float
    speedup: float
    wilcoxon_p: float
    ttest_p: float


@dataclass
class BenchReport:
    samples: list
    summary: list
    checksum: str
    pvalues: dict  # (method, n_perm) -> array (records x bands)
    threads: int = 1


def input_checksum(x, y) -> str:
    h = hashlib.sha256()
    for a in (x, y):
        a = np.ascontiguousarray(a, dtype=np.complex128)
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


def _glm_pass(x, y, bands):
    # closed form, so every record and band goes through one vectorised call
    d = glm_deviance_array(x[:, bands, None], y[:, bands, :])
    return chi2_2_sf(d).T


def _surrogate_pass(x, y, bands, cfg: SurrogateConfig, pool=None):
    out = np.empty((y.shape[2], len(bands)))
    # observed values for every record at once; each row reduces exactly as
    # in the single-record path
    obs = np.stack(
        [coherence_values(x[None, :, k], y[:, k, :].T, axis=1) for k in bands], axis=1
    )

    def one(j):
        for i, k in enumerate(bands):
            null = null_distribution(x[:, k], y[:, k, j], cfg.method, cfg.n_perm, cfg.seed, j, k)
            out[j, i] = empirical_pvalue(float(obs[j, i]), null, cfg.plus_one)

    if pool is None:
        for j in range(y.shape[2]):
            one(j)
    else:
        list(pool.map(one, range(y.shape[2])))
    return out


def _time(fn, warmup, repeats):
    for _ in range(warmup):
        fn()
    secs = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = fn()
        secs.append(time.perf_counter() - t0)
    return secs, res


def run_bench(x, y, cfg: BenchConfig, bands=None, threads: int = 1) -> BenchReport:
    """Time every method at every ``n_perm`` in the grid.

    ``x`` is the driver's coefficient matrix ``(T, F)``; ``y`` stacks the
    subsampled observations as ``(T, F, n)``.  ``bands`` lists the band
    indices to test.  ``threads > 1`` spreads the surrogate records over
    a thread pool; the default single thread keeps the comparison fair.
    """
    x = np.asarray(x)
    y = np.asarray(y)
    if y.ndim == 2:
        y = y[:, :, None]
    if y.shape[:2] != x.shape:
        raise ValueError(f"driver {x.shape} and observations {y.shape[:2]} differ")
    bands = list(range(x.shape[1])) if bands is None else [int(b) for b in bands]
    x = np.ascontiguousarray(x)
    y = np.ascontiguousarray(y)
    checksum = input_checksum(x, y)

    samples, pvalues, med = [], {}, {}
    raw = {}
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for n_perm in cfg.n_perm_grid:
            secs, p = _time(lambda: _glm_pass(x, y, bands), cfg.warmup, cfg.repeats)
            raw["glm", n_perm] = secs
            pvalues["glm", n_perm] = p
            for method in BENCH_METHODS[1:]:
                scfg = SurrogateConfig(method, n_perm, cfg.seed, cfg.plus_one)
                secs, p = _time(
                    lambda: _surrogate_pass(x, y, bands, scfg, pool), cfg.warmup, cfg.repeats
                )
                raw[method, n_perm] = secs
                pvalues[method, n_perm] = p
    finally:
        if pool is not None:
            pool.shutdown()
    for (method, n_perm), secs in raw.items():
        samples += [BenchSample(method, n_perm, r, s) for r, s in enumerate(secs)]
        med[method, n_perm] = float(np.median(secs))

    summary = []
    for n_perm in cfg.n_perm_grid:
        g = raw["glm", n_perm]
        summary.append(
            BenchSummaryRow("glm", None, n_perm, med["glm", n_perm], float(np.std(g)),
                            1.0, math.nan, math.nan)
        )
        for method in BENCH_METHODS[1:]:
            s = raw[method, n_perm]
            try:
                sig = significance_of_timings(g, s)
                wp, tp = sig.wilcoxon_p, sig.ttest_p
            except InsufficientData:
                wp = tp = math.nan
            summary.append(
                BenchSummaryRow(method, n_perm, n_perm, med[method, n_perm],
                                float(np.std(s)), med[method, n_perm] / med["glm", n_perm],
                                wp, tp)
            )
    return BenchReport(samples, summary, checksum, pvalues, threads)


@dataclass(frozen=True)
class TimingComparison:
    n_pairs: int
    wilcoxon_p: float
    ttest_p: float
    median_log_ratio: float


def significance_of_timings(a, b) -> TimingComparison:
    """Paired comparison of two timing vectors on the log scale.

    Returns the exact two-sided Wilcoxon signed-rank p-value and the
    paired t-test p-value.  Identical vectors give ``p = 1`` for both.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("timings must be 1-D vectors of equal length")
    if a.size < 6:
        raise InsufficientData(f"need at least 6 paired repeats, got {a.size}")
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("timings must be positive")
    d = np.log(b) - np.log(a)
    if np.all(d == 0):
        return TimingComparison(a.size, 1.0, 1.0, 0.0)
    w = stats.wilcoxon(d, zero_method="wilcox", method="exact" if np.all(d != 0) else "auto")
    if np.all(d == d[0]):
        # constant nonzero differences: the t statistic is infinite
        t_p = 0.0
    else:
        t_p = float(stats.ttest_1samp(d, 0.0).pvalue)
    return TimingComparison(a.size, float(w.pvalue), t_p, float(np.median(d)))


def write_bench_csv(report: BenchReport, path):
    """``method,n_perm,repeat,seconds``; GLM rows carry the grid setting."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "n_perm", "repeat", "seconds"])
        for s in report.samples:
            w.writerow([s.method, s.n_perm, s.repeat, repr(s.seconds)])


def _na(v):
    return "NA" if v is None or (isinstance(v, float) and math.isnan(v)) else repr(v)


def write_bench_summary_csv(report: BenchReport, path):
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "n_perm", "setting", "median_s", "std_s", "speedup",
                    "wilcoxon_p", "ttest_p", "threads", "input_sha256"])
        for r in report.summary:
            w.writerow([r.method, "NA" if r.n_perm is None else r.n_perm, r.setting,
                        repr(r.median_s), repr(r.std_s), _na(r.speedup),
                        _na(r.wilcoxon_p), _na(r.ttest_p), report.threads, report.checksum])


def write_bench_pvalues_csv(report: BenchReport, bands_hz, path):
    """p-values computed inside the timed region; deterministic given the seed."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "n_perm", "record", "band_hz", "p_value"])
        seen_glm = False
        for (method, n_perm), p in report.pvalues.items():
            if method == "glm":
                if seen_glm:
                    continue
                seen_glm = True
            for j in range(p.shape[0]):
                for i, f in enumerate(bands_hz):
                    w.writerow([method, "NA" if method == "glm" else n_perm, j,
                                repr(float(f)), repr(float(p[j, i]))])
