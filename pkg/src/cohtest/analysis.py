"""Summaries of sweep records: power curves, ROC, p-value agreement, PSD."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal as _sps

from .decompose import Signal
from .exceptions import EmptyInput, InsufficientData, SignalTooShort

METHODS = ("glm", "circ", "phase")
LEVELS = (0.5, 0.8, 0.9)


@dataclass(frozen=True)
class PowerCurve:
    bin_centers: np.ndarray
    counts: np.ndarray
    detection_rate: dict
    c50: dict
    c80: dict
    c90: dict
    snr_at_80_db: dict
    alpha: float
    bin_width: float
    axis: str = "observed"


def _crossing(centers, rates, level):
    """First crossing of ``level``, linearly interpolated between bin centers.

    Returns ``(value, bin_index)``; ``(nan, -1)`` when the level is never reached.
    """
    hit = np.flatnonzero(rates >= level)
    if hit.size == 0:
        return math.nan, -1
    i = int(hit[0])
    if i == 0:
        return float(centers[0]), 0
    r0, r1 = rates[i - 1], rates[i]
    c0, c1 = centers[i - 1], centers[i]
    return float(c0 + (level - r0) / (r1 - r0) * (c1 - c0)), i


def power_curve(records, alpha=0.05, bin_width=0.025, axis="observed") -> PowerCurve:
    """Detection rate (p < alpha) per coherence bin, with C50/C80/C90.

    ``axis`` picks what to bin on: observed coherence at the peak band
    (``"observed"``) or the injected target (``"true"``).  Thresholds that
    are never reached are reported as NaN.
    """
    if len(records) == 0:
        raise EmptyInput("no records")
    if axis not in ("observed", "true"):
        raise ValueError("axis must be 'observed' or 'true'")
    x = np.array([r.c_obs if axis == "observed" else r.c_true for r in records])
    p = {m: np.array([getattr(r, f"p_{m}") for r in records]) for m in METHODS}
    snr = np.array([r.snr_db for r in records])

    idx = np.floor(x / bin_width + 1e-12).astype(int)
    bins = np.unique(idx)
    if bins.size < 2:
        raise InsufficientData("need at least 2 non-empty bins")
    centers = (bins + 0.5) * bin_width
    counts = np.array([np.count_nonzero(idx == b) for b in bins])

    rates, thresholds, snr80 = {}, {lv: {} for lv in LEVELS}, {}
    for m in METHODS:
        det = p[m] < alpha
        rates[m] = np.array([det[idx == b].mean() for b in bins])
        for lv in LEVELS:
            thresholds[lv][m], i = _crossing(centers, rates[m], lv)
            if lv == 0.8:
                snr80[m] = float(snr[idx == bins[i]].mean()) if i >= 0 else math.nan
    return PowerCurve(
        bin_centers=centers,
        counts=counts,
        detection_rate=rates,
        c50=thresholds[0.5],
        c80=thresholds[0.8],
        c90=thresholds[0.9],
        snr_at_80_db=snr80,
        alpha=alpha,
        bin_width=bin_width,
        axis=axis,
    )


@dataclass(frozen=True)
class RocResult:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray
    auc: float
    control_freq_hz: float = math.nan


def roc(p_pos, p_neg, control_freq_hz=math.nan) -> RocResult:
    """Empirical ROC treating small p-values as detections.

    Each distinct p-value in either set is a threshold; a case counts as
    detected when ``p <= threshold``, so tied values enter together.
    """
    p_pos = np.asarray(p_pos, dtype=float).ravel()
    p_neg = np.asarray(p_neg, dtype=float).ravel()
    if p_pos.size == 0 or p_neg.size == 0:
        raise EmptyInput("roc needs at least one positive and one negative")
    thr = np.unique(np.concatenate([p_pos, p_neg]))
    tpr = np.searchsorted(np.sort(p_pos), thr, side="right") / p_pos.size
    fpr = np.searchsorted(np.sort(p_neg), thr, side="right") / p_neg.size
    tpr = np.concatenate([[0.0], tpr])
    fpr = np.concatenate([[0.0], fpr])
    thr = np.concatenate([[-np.inf], thr])
    auc = float(np.trapezoid(tpr, fpr))
    return RocResult(fpr, tpr, thr, auc, control_freq_hz)


def roc_from_records(records, method, control_freq_hz=math.nan) -> RocResult:
    pos = [getattr(r, f"p_{method}") for r in records]
    neg = [getattr(r, f"p_{method}_ctrl") for r in records]
    if control_freq_hz != control_freq_hz and records:
        control_freq_hz = records[0].ctrl_hz
    return roc(pos, neg, control_freq_hz)


def agreement_pairs(records, n_perm=2000) -> np.ndarray:
    """Rows of ``(-log10 p_glm clipped, -log10 p_phase, c_obs)``.

    GLM values are clipped at the surrogate floor ``-log10(1/(n_perm+1))``.
    """
    if len(records) == 0:
        raise EmptyInput("no records")
    cap = math.log10(n_perm + 1)
    glm = np.array([r.p_glm for r in records])
    phase = np.array([r.p_phase for r in records])
    c = np.array([r.c_obs for r in records])
    with np.errstate(divide="ignore"):
        lg = np.minimum(-np.log10(glm), cap)
        out = np.column_stack([lg, -np.log10(phase), c])
    return out + 0.0  # turn -0.0 into 0.0


def welch_psd(sig: Signal, segment_s=20.0, overlap_frac=0.5):
    """One-sided Welch PSD with Hann segments.

    ``psd`` is a density (units^2 / Hz) whose integral over frequency is the
    signal variance.
    """
    nperseg = int(round(segment_s * sig.fs_hz))
    if nperseg < 2 or nperseg > sig.n:
        raise SignalTooShort(
            f"segment of {segment_s} s does not fit a {sig.duration_s:.3g} s signal"
        )
    if not 0 <= overlap_frac < 1:
        raise ValueError("overlap_frac must lie in [0, 1)")
    return _sps.welch(
        sig.samples,
        fs=sig.fs_hz,
        window="hann",
        nperseg=nperseg,
        noverlap=int(overlap_frac * nperseg),
        scaling="density",
    )


def _num(v):
    v = float(v)
    return "NA" if math.isnan(v) else repr(v)


def _writer(path):
    fh = open(path, "w", newline="", encoding="utf-8")
    return fh, csv.writer(fh, lineterminator="\n")


def write_power_curve_csv(pc: PowerCurve, path):
    """``bin_center,count,rate_glm,rate_circ,rate_phase``."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["bin_center", "count"] + [f"rate_{m}" for m in METHODS])
        for i, c in enumerate(pc.bin_centers):
            w.writerow([_num(c), int(pc.counts[i])] + [_num(pc.detection_rate[m][i]) for m in METHODS])


def write_thresholds_csv(pc: PowerCurve, path):
    """``method,c50,c80,c90,snr_at_80_db,alpha,axis``; unreached levels are ``NA``."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["method", "c50", "c80", "c90", "snr_at_80_db", "alpha", "axis"])
        for m in METHODS:
            w.writerow([m, _num(pc.c50[m]), _num(pc.c80[m]), _num(pc.c90[m]),
                        _num(pc.snr_at_80_db[m]), _num(pc.alpha), pc.axis])


def write_roc_csv(results: dict, path):
    """``method,threshold,fpr,tpr`` (the first row per method is the origin)."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["method", "threshold", "fpr", "tpr"])
        for m, r in results.items():
            for t, f, p in zip(r.thresholds, r.fpr, r.tpr):
                w.writerow([m, "-inf" if t == -np.inf else _num(t), _num(f), _num(p)])


def write_auc_csv(results: dict, path):
    fh, w = _writer(path)
    with fh:
        w.writerow(["method", "auc", "control_freq_hz"])
        for m, r in results.items():
            w.writerow([m, _num(r.auc), _num(r.control_freq_hz)])


def write_agreement_csv(pairs, path):
    fh, w = _writer(path)
    with fh:
        w.writerow(["neglog10_p_glm_clipped", "neglog10_p_phase", "c_obs"])
        for row in pairs:
            w.writerow([_num(v) for v in row])


def write_psd_csv(freqs, psd_x, psd_y, path):
    """``freq_hz,psd_x,psd_y`` in units^2/Hz (one-sided)."""
    fh, w = _writer(path)
    with fh:
        w.writerow(["freq_hz", "psd_x", "psd_y"])
        for f, a, b in zip(freqs, psd_x, psd_y):
            w.writerow([_num(f), _num(a), _num(b)])
