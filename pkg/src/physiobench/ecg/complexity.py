"""Nonlinear HRV indices: entropies, fractal dimensions, multifractal DFA,
and recurrence quantification. Inner loops live in ``physiobench._kernels``."""

from __future__ import annotations

import numpy as np

from .. import _kernels
from .peaks import RRSeries

NAN = float("nan")

ENTROPY_M = 2
ENTROPY_R_FACTOR = 0.2
SHANEN_BINS = 10
MSE_SCALES = (1, 2, 3)

HIGUCHI_KMAX = 10

MFDFA_SCALES = tuple(range(4, 17))
MFDFA_Q = tuple(q for q in range(-5, 6) if q != 0)
MFDFA_MIN_BEATS = 32

RQA_DIM = 3
RQA_DELAY = 1
RQA_RADIUS_FACTOR = 0.2
RQA_LMIN = 2


def _tolerance(nn: np.ndarray) -> float:
    return ENTROPY_R_FACTOR * float(np.std(nn, ddof=1))


def sample_entropy(x: np.ndarray, m: int, r: float) -> float:
    b, a = _kernels.sampen_counts(np.ascontiguousarray(x, dtype=float), m, r)
    if a == 0 or b == 0:
        return NAN
    return float(-np.log(a / b))


def approximate_entropy(x: np.ndarray, m: int, r: float) -> float:
    x = np.ascontiguousarray(x, dtype=float)
    if len(x) < m + 2:
        return NAN
    return float(_kernels.apen_phi(x, m, r) - _kernels.apen_phi(x, m + 1, r))


def shannon_entropy(x: np.ndarray, bins: int = SHANEN_BINS) -> float:
    counts, _ = np.histogram(x, bins=bins)
    p = counts[counts > 0] / len(x)
    return float(-np.sum(p * np.log2(p)))


def _coarse_grain(x: np.ndarray, scale: int, offset: int = 0) -> np.ndarray:
    usable = (len(x) - offset) // scale
    if usable < 1:
        return np.array([])
    seg = x[offset:offset + usable * scale]
    return seg.reshape(usable, scale).mean(axis=1)


def entropy_suite(rr: RRSeries) -> dict:
    """ApEn, SampEn, ShanEn, and (composite) multiscale sample entropy."""
    nn = rr.nn_ms
    out = {"ApEn": NAN, "SampEn": NAN, "ShanEn": NAN, "MSEn": NAN, "CMSEn": NAN}
    if len(nn) < ENTROPY_M + 2:
        return out
    r = _tolerance(nn)
    out["ApEn"] = approximate_entropy(nn, ENTROPY_M, r)
    out["SampEn"] = sample_entropy(nn, ENTROPY_M, r)
    out["ShanEn"] = shannon_entropy(nn)

    mse = []
    for scale in MSE_SCALES:
        cg = _coarse_grain(nn, scale)
        if len(cg) < ENTROPY_M + 2:
            mse.append(NAN)
        else:
            mse.append(sample_entropy(cg, ENTROPY_M, r))
    out["MSEn"] = float(np.mean(mse)) if not np.any(np.isnan(mse)) else NAN

    cmse = []
    for scale in MSE_SCALES:
        vals = []
        for offset in range(scale):
            cg = _coarse_grain(nn, scale, offset)
            if len(cg) < ENTROPY_M + 2:
                vals.append(NAN)
            else:
                vals.append(sample_entropy(cg, ENTROPY_M, r))
        cmse.append(float(np.mean(vals)))
    out["CMSEn"] = float(np.mean(cmse)) if not np.any(np.isnan(cmse)) else NAN
    return out


def higuchi_fd(x: np.ndarray, kmax: int = HIGUCHI_KMAX) -> float:
    x = np.ascontiguousarray(x, dtype=float)
    if len(x) < 2 * kmax:
        return NAN
    lengths = np.asarray(_kernels.higuchi_lengths(x, kmax))
    if np.any(lengths <= 0):
        return NAN
    k = np.arange(1, kmax + 1)
    slope = np.polyfit(np.log(1.0 / k), np.log(lengths), 1)[0]
    return float(slope)


def katz_fd(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    n = len(x) - 1
    if n < 2:
        return NAN
    dx = np.diff(x)
    length = float(np.sum(np.sqrt(1.0 + dx * dx)))
    i = np.arange(len(x))
    d = float(np.max(np.sqrt(i * i + (x - x[0]) ** 2)))
    if length == 0 or d == 0:
        return NAN
    return float(np.log10(n) / (np.log10(n) + np.log10(d / length)))


def lempel_ziv_complexity(x: np.ndarray) -> float:
    """LZ76 phrase count of the median-binarized series, times log2(n)/n."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        return NAN
    bits = (x > np.median(x)).astype(np.int64)
    c = _kernels.lz76_complexity(bits)
    return float(c * np.log2(n) / n)


def fractal_suite(rr: RRSeries) -> dict:
    nn = rr.nn_ms
    return {
        "HFD": higuchi_fd(nn) if len(nn) else NAN,
        "KFD": katz_fd(nn) if len(nn) else NAN,
        "LZC": lempel_ziv_complexity(nn) if len(nn) else NAN,
    }


def _dfa_fq(profile: np.ndarray, scales, qs, order: int = 1):
    """log F_q(s) matrix (len(qs) x len(scales)); None if any segment is flat."""
    log_fq = np.empty((len(qs), len(scales)))
    for si, s in enumerate(scales):
        var = np.asarray(_kernels.dfa_segment_variances(
            np.ascontiguousarray(profile, dtype=float), s, order))
        if len(var) == 0 or np.any(var <= 0):
            return None
        for qi, q in enumerate(qs):
            log_fq[qi, si] = np.log((np.mean(var ** (q / 2.0))) ** (1.0 / q))
    return log_fq


def mfdfa_alpha1(rr: RRSeries) -> dict:
    """Short-scale multifractal DFA singularity-spectrum summaries."""
    nn = rr.nn_ms
    keys = ("MFDFA_alpha1_Width", "MFDFA_alpha1_Peak", "MFDFA_alpha1_Mean",
            "MFDFA_alpha1_Max", "MFDFA_alpha1_Fluctuation")
    out = {k: NAN for k in keys}
    if len(nn) < MFDFA_MIN_BEATS:
        return out
    profile = np.cumsum(nn - np.mean(nn))
    scales = [s for s in MFDFA_SCALES if len(profile) // s >= 2]
    if len(scales) < 3:
        return out
    log_fq = _dfa_fq(profile, scales, MFDFA_Q)
    if log_fq is None:
        return out
    log_s = np.log(np.asarray(scales, dtype=float))
    qs = np.asarray(MFDFA_Q, dtype=float)
    h = np.array([np.polyfit(log_s, log_fq[qi], 1)[0] for qi in range(len(qs))])
    tau = qs * h - 1.0
    alpha = np.gradient(tau, qs)
    f_alpha = qs * alpha - tau
    out["MFDFA_alpha1_Width"] = float(alpha.max() - alpha.min())
    out["MFDFA_alpha1_Peak"] = float(alpha[int(np.argmax(f_alpha))])
    out["MFDFA_alpha1_Mean"] = float(alpha.mean())
    out["MFDFA_alpha1_Max"] = float(alpha.max())
    q2 = int(np.where(qs == 2)[0][0])
    out["MFDFA_alpha1_Fluctuation"] = float(np.mean(log_fq[q2]))
    return out


def _embed(x: np.ndarray, dim: int, delay: int) -> np.ndarray:
    n = len(x) - (dim - 1) * delay
    return np.column_stack([x[k * delay:k * delay + n] for k in range(dim)])


def rqa(rr: RRSeries) -> dict:
    """Recurrence statistics of the NN series (dim 3, delay 1, r = 0.2 SD)."""
    nn = rr.nn_ms
    keys = ("RecurrenceRate", "DiagRec", "Determinism", "L", "W", "WMax")
    out = {k: NAN for k in keys}
    if len(nn) < (RQA_DIM - 1) * RQA_DELAY + 2:
        return out
    radius = RQA_RADIUS_FACTOR * float(np.std(nn, ddof=1))
    emb = np.ascontiguousarray(_embed(nn, RQA_DIM, RQA_DELAY), dtype=float)
    rec = np.asarray(_kernels.recurrence_matrix(emb, radius))
    n = rec.shape[0]
    total, on_lines, line_count, line_sum = _kernels.diag_line_stats(rec, RQA_LMIN)
    out["RecurrenceRate"] = total / (n * n)
    out["DiagRec"] = on_lines / (n * n)
    out["Determinism"] = on_lines / total if total > 0 else NAN
    out["L"] = line_sum / line_count if line_count > 0 else NAN
    w_count, w_sum, w_max = _kernels.white_vertical_stats(rec)
    out["W"] = w_sum / w_count if w_count > 0 else 0.0
    out["WMax"] = float(w_max)
    return out
