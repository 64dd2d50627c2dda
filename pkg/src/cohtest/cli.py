"""``cohtest`` command line.

Exit codes: 0 success, 2 bad configuration or input (nothing is written),
1 any other failure.
"""

from __future__ import annotations

import argparse
import csv
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import analysis, bench, rng
from .config import ConfigError, RunConfig, load_config
from .coherence import coherence
from .decompose import BandRep, decompose, peak_frequency
from .exceptions import CohtestError, DriverLoadError, EmptyInput, InsufficientData
from .glm import glm_spectrum
from .simulate import (
    load_driver_csv,
    make_driver,
    make_observation,
    observation_tensor,
    read_sweep_csv,
    run_sweep,
    subsample_indices,
    write_sweep_csv,
)
from .surrogate import SurrogateConfig, surrogate_pvalues


class UsageError(Exception):
    """Bad input detected before any output is written (exit code 2)."""


def _u64(text):
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def _pos_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--seed", type=_u64, help="top-level random seed")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--threads", type=_pos_int, help="worker threads")
    common.add_argument("--nperm", type=_pos_int, help="surrogates per test")
    common.add_argument("--alpha", type=float, help="significance level")

    p = argparse.ArgumentParser(prog="cohtest", description="Coherence significance tests.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", parents=[common], help="run a coherence sweep")
    s.add_argument("--save-tensors", action="store_true",
                   help="also write driver/observation coefficients to tensors.npz")
    t = sub.add_parser("test", parents=[common], help="test a driver/observation pair")
    t.add_argument("driver_csv", type=Path)
    t.add_argument("observation_csv", type=Path)
    for name, what in (("power", "power curves"), ("roc", "ROC curves"),
                       ("agreement", "GLM vs surrogate p-values")):
        a = sub.add_parser(name, parents=[common], help=f"{what} from a sweep CSV")
        a.add_argument("sweep_csv", type=Path)
    sub.add_parser("bench", parents=[common], help="time the three tests")
    return p


class _Staging:
    """Write outputs into a scratch directory; move them into place on success."""

    def __init__(self, out: Path):
        self.out = out

    def __enter__(self):
        self.out.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=".cohtest-", dir=self.out))
        return self.tmp

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                for f in sorted(self.tmp.iterdir()):
                    f.replace(self.out / f.name)
        finally:
            shutil.rmtree(self.tmp, ignore_errors=True)
        return False


def _records_or_usage(path: Path):
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        records = read_sweep_csv(path)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"bad sweep CSV {path}: {exc}") from exc
    if not records:
        raise UsageError(f"sweep CSV {path} has no rows")
    return records


def _check_driver(cfg: RunConfig):
    """Load a CSV driver up front so a bad file is a usage error."""
    if cfg.driver.source != "csv":
        return
    try:
        make_driver(cfg.driver, None)
    except DriverLoadError as exc:
        raise UsageError(str(exc)) from exc


def cmd_simulate(cfg: RunConfig, args) -> list[str]:
    _check_driver(cfg)
    res = run_sweep(cfg.driver, cfg.sweep, cfg.n_perm, cfg.analysis.control_freq_hz,
                    cfg.threads, keep_tensors=args.save_tensors, plus_one=cfg.plus_one)
    # PSD of the driver and of the observation at the middle of the grid
    mid = cfg.sweep.c_true_grid.size // 2
    y, _, _ = make_observation(
        res.driver, float(cfg.sweep.c_true_grid[mid]), cfg.bands,
        rng.substream(cfg.seed, rng.NOISE, mid),
    )
    a = cfg.analysis
    f, px = analysis.welch_psd(res.driver, a.psd_segment_s, a.psd_overlap)
    _, py = analysis.welch_psd(y, a.psd_segment_s, a.psd_overlap)
    with _Staging(cfg.output_dir) as tmp:
        write_sweep_csv(res.records, tmp / "sweep.csv")
        analysis.write_psd_csv(f, px, py, tmp / "psd.csv")
        written = ["sweep.csv", "psd.csv"]
        if args.save_tensors:
            np.savez(tmp / "tensors.npz", ax=res.ax.coeffs, ay=res.ay,
                     band_centers_hz=res.ax.band_centers_hz, c_true=cfg.sweep.c_true_grid)
            written.append("tensors.npz")
    return written


def cmd_test(cfg: RunConfig, args) -> list[str]:
    for p in (args.driver_csv, args.observation_csv):
        if not p.is_file():
            raise UsageError(f"no such file: {p}")
    try:
        x = load_driver_csv(args.driver_csv, cfg.driver.fs_hz)
        y = load_driver_csv(args.observation_csv, cfg.driver.fs_hz)
    except DriverLoadError as exc:
        raise UsageError(str(exc)) from exc
    if x.n != y.n or x.fs_hz != y.fs_hz:
        raise UsageError(
            f"driver ({x.n} samples at {x.fs_hz} Hz) and observation "
            f"({y.n} samples at {y.fs_hz} Hz) differ in length or rate"
        )
    try:
        ax: BandRep = decompose(x, cfg.bands)
        ay: BandRep = decompose(y, cfg.bands)
    except CohtestError as exc:
        raise UsageError(str(exc)) from exc
    glm = glm_spectrum(ax, ay)
    c = coherence(ax, ay).values
    pc, pp = (
        surrogate_pvalues(ax, ay, SurrogateConfig(m, cfg.n_perm, cfg.seed, cfg.plus_one),
                          threads=cfg.threads)
        for m in ("circular_shift", "phase_randomize")
    )
    with _Staging(cfg.output_dir) as tmp:
        with (tmp / "test.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["band_hz", "c_obs", "p_glm", "p_circ", "p_phase"])
            for k, f in enumerate(ax.band_centers_hz):
                w.writerow([repr(float(f)), repr(float(c[k])), repr(float(glm.p_value[k])),
                            repr(float(pc[k])), repr(float(pp[k]))])
    return ["test.csv"]


def cmd_power(cfg: RunConfig, args) -> list[str]:
    records = _records_or_usage(args.sweep_csv)
    a = cfg.analysis
    try:
        pc = analysis.power_curve(records, a.alpha, a.bin_width, a.axis)
    except (EmptyInput, InsufficientData) as exc:
        raise UsageError(str(exc)) from exc
    with _Staging(cfg.output_dir) as tmp:
        analysis.write_power_curve_csv(pc, tmp / "power_curve.csv")
        analysis.write_thresholds_csv(pc, tmp / "power_thresholds.csv")
    return ["power_curve.csv", "power_thresholds.csv"]


def cmd_roc(cfg: RunConfig, args) -> list[str]:
    records = _records_or_usage(args.sweep_csv)
    if len(records) < 2:
        raise UsageError("ROC needs at least two sweep records")
    if any(np.isnan(getattr(r, f"p_{m}_ctrl")) for r in records for m in analysis.METHODS):
        raise UsageError("sweep CSV lacks control-band p-values (p_*_ctrl columns)")
    results = {m: analysis.roc_from_records(records, m) for m in analysis.METHODS}
    with _Staging(cfg.output_dir) as tmp:
        analysis.write_roc_csv(results, tmp / "roc.csv")
        analysis.write_auc_csv(results, tmp / "roc_auc.csv")
    return ["roc.csv", "roc_auc.csv"]


def cmd_agreement(cfg: RunConfig, args) -> list[str]:
    records = _records_or_usage(args.sweep_csv)
    pairs = analysis.agreement_pairs(records, cfg.n_perm)
    with _Staging(cfg.output_dir) as tmp:
        analysis.write_agreement_csv(pairs, tmp / "agreement.csv")
    return ["agreement.csv"]


def cmd_bench(cfg: RunConfig, args) -> list[str]:
    _check_driver(cfg)
    bc = cfg.bench
    idx = subsample_indices(cfg.sweep.c_true_grid.size, bc.n_coh_sub)
    ax, ay = observation_tensor(cfg.driver, cfg.sweep, idx)
    if bc.bands == "peak":
        bands = [peak_frequency(ax)[0]]
    else:
        bands = list(range(ax.n_bands))
    report = bench.run_bench(ax.coeffs, ay, bc, bands=bands, threads=cfg.threads)
    with _Staging(cfg.output_dir) as tmp:
        bench.write_bench_csv(report, tmp / "bench.csv")
        bench.write_bench_summary_csv(report, tmp / "bench_summary.csv")
        bench.write_bench_pvalues_csv(report, ax.band_centers_hz[bands], tmp / "bench_pvalues.csv")
    return ["bench.csv", "bench_summary.csv", "bench_pvalues.csv"]


COMMANDS = {
    "simulate": cmd_simulate,
    "test": cmd_test,
    "power": cmd_power,
    "roc": cmd_roc,
    "agreement": cmd_agreement,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config).with_overrides(
            seed=args.seed, out=args.out, threads=args.threads,
            n_perm=args.nperm, alpha=args.alpha,
        )
    except (ConfigError, ValueError) as exc:
        print(f"cohtest: config error: {exc}", file=sys.stderr)
        return 2
    print(f"seed: {cfg.seed}")
    try:
        written = COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"cohtest: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report and map to exit 1
        print(f"cohtest: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for name in written:
        print(cfg.output_dir / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
