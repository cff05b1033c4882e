"""Time-domain, spectral, and geometric HRV features of an NN series."""

from __future__ import annotations

import numpy as np
from scipy import signal as sps
from scipy.interpolate import CubicSpline

from .peaks import RRSeries

NAN = float("nan")

TINN_BIN_MS = 7.8125
TINN_MIN_N = 20

TACHOGRAM_FS = 4.0
WELCH_SEGMENT_S = 32.0
LF_BAND = (0.04, 0.15)
HF_BAND = (0.15, 0.40)
VHF_BAND = (0.40, 0.50)
MIN_SPECTRAL_SPAN_S = 30.0


def _sd(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if len(x) >= 2 else NAN


def time_domain(rr: RRSeries) -> dict:
    """MeanNN, SDNN, MadNN, MinNN, TINN (all in ms)."""
    nn = rr.nn_ms
    out = {"MeanNN": NAN, "SDNN": NAN, "MadNN": NAN, "MinNN": NAN, "TINN": NAN}
    if len(nn) == 0:
        return out
    out["MeanNN"] = float(np.mean(nn))
    out["MinNN"] = float(np.min(nn))
    if len(nn) >= 2:
        out["SDNN"] = _sd(nn)
        med = np.median(nn)
        out["MadNN"] = float(1.4826 * np.median(np.abs(nn - med)))
    if len(nn) >= TINN_MIN_N:
        out["TINN"] = _tinn(nn)
    return out


def _tinn(nn: np.ndarray) -> float:
    """Baseline width of the least-squares triangle over the NN histogram."""
    lo = np.floor(nn.min() / TINN_BIN_MS) * TINN_BIN_MS
    hi = np.ceil(nn.max() / TINN_BIN_MS) * TINN_BIN_MS
    nbins = max(int(round((hi - lo) / TINN_BIN_MS)), 1)
    counts, edges = np.histogram(nn, bins=nbins, range=(lo, lo + nbins * TINN_BIN_MS))
    x = int(np.argmax(counts))
    peak = counts[x]
    if peak == 0:
        return NAN
    occupied = np.flatnonzero(counts)
    j_min, j_max = int(occupied[0]), int(occupied[-1])
    if j_min == j_max:
        return 0.0
    best = (np.inf, 0.0)
    for n_idx in range(j_min - 1, x):
        for m_idx in range(x + 1, j_max + 2):
            q = np.zeros(nbins)
            up = np.arange(n_idx, x + 1)
            q[up[(up >= 0) & (up < nbins)]] = peak * (up[(up >= 0) & (up < nbins)] - n_idx) / (x - n_idx)
            down = np.arange(x, m_idx + 1)
            sel = (down >= 0) & (down < nbins)
            q[down[sel]] = peak * (m_idx - down[sel]) / (m_idx - x)
            err = float(np.sum((counts - q) ** 2))
            if err < best[0]:
                best = (err, (m_idx - n_idx) * TINN_BIN_MS)
    return best[1]


def _band_power(freqs: np.ndarray, psd: np.ndarray, band: tuple, closed_top: bool) -> float:
    lo, hi = band
    mask = (freqs >= lo) & ((freqs <= hi) if closed_top else (freqs < hi))
    if mask.sum() == 0:
        return 0.0
    if mask.sum() == 1:
        df = freqs[1] - freqs[0] if len(freqs) > 1 else 1.0
        return float(psd[mask][0] * df)
    return float(np.trapezoid(psd[mask], freqs[mask]))


def frequency_domain(rr: RRSeries) -> dict:
    """Raw Welch band powers of the 4 Hz cubic-spline tachogram (ms^2).

    Returns LF/HF/VHF powers plus the LF/HF ratio; log scaling is applied
    downstream when features are assembled into a matrix.
    """
    out = {"LF": NAN, "HF": NAN, "VHF": NAN, "LF_HF": NAN}
    nn = rr.nn_ms
    if len(nn) < 4:
        return out
    t = np.cumsum(nn) / 1000.0
    span = t[-1] - t[0]
    if span < MIN_SPECTRAL_SPAN_S:
        return out
    spline = CubicSpline(t, nn)
    grid = np.arange(t[0], t[-1], 1.0 / TACHOGRAM_FS)
    tach = spline(grid)
    nperseg = min(int(WELCH_SEGMENT_S * TACHOGRAM_FS), len(tach))
    freqs, psd = sps.welch(tach, fs=TACHOGRAM_FS, window="hann",
                           nperseg=nperseg, noverlap=nperseg // 2,
                           detrend="constant")
    lf = _band_power(freqs, psd, LF_BAND, closed_top=False)
    hf = _band_power(freqs, psd, HF_BAND, closed_top=False)
    vhf = _band_power(freqs, psd, VHF_BAND, closed_top=True)
    out["LF"], out["HF"], out["VHF"] = lf, hf, vhf
    out["LF_HF"] = lf / hf if hf > 0 else NAN
    return out


def poincare(rr: RRSeries) -> dict:
    """Short-axis SD and the modified cardiac sympathetic index."""
    nn = rr.nn_ms
    out = {"SD1": NAN, "CSI_Modified": NAN}
    if len(nn) < 3:
        return out
    sd1 = _sd((nn[:-1] - nn[1:]) / np.sqrt(2))
    sd2 = _sd((nn[:-1] + nn[1:]) / np.sqrt(2))
    out["SD1"] = sd1
    if sd1 > 0:
        # L = 4*SD2, W = 4*SD1, index = L^2 / W
        out["CSI_Modified"] = (4 * sd2) ** 2 / (4 * sd1)
    return out


def asymmetry(rr: RRSeries) -> dict:
    """Heart-rate-asymmetry indices over the lag-1 return map.

    d is the signed distance to the identity line (positive above, i.e.
    decelerations); a is the centered position along the identity line.
    GI and the contribution ratios use squared distances; PI counts
    points below the line among off-line points.
    """
    nn = rr.nn_ms
    out = {"GI": NAN, "PI": NAN, "C1d": NAN, "C2d": NAN}
    if len(nn) < 3:
        return out
    x, y = nn[:-1], nn[1:]
    d = (y - x) / np.sqrt(2)
    off = d != 0
    if not np.any(off):
        return out
    d2_all = float(np.sum(d[off] ** 2))
    d2_up = float(np.sum(d[off & (d > 0)] ** 2))
    out["GI"] = 100.0 * d2_up / d2_all
    out["PI"] = 100.0 * float(np.sum(d < 0)) / float(np.sum(off))
    out["C1d"] = d2_up / d2_all
    m = float(np.mean(nn))
    a = (x - m + y - m) / np.sqrt(2)
    a2_all = float(np.sum(a ** 2))
    if a2_all > 0:
        out["C2d"] = float(np.sum(a[d > 0] ** 2)) / a2_all
    return out


def fragmentation(rr: RRSeries) -> dict:
    """Inflection-point and alternation-segment percentages."""
    nn = rr.nn_ms
    out = {"PIP": NAN, "PAS": NAN}
    n = len(nn)
    if n < 3:
        return out
    d = np.diff(nn)
    s = np.sign(d)
    changes = 0
    for i in range(1, len(d)):
        if s[i] != s[i - 1] or s[i] == 0 or s[i - 1] == 0:
            changes += 1
    out["PIP"] = 100.0 * changes / (n - 2)

    # maximal runs of strictly alternating differences; a run of k
    # alternating diffs spans k+1 intervals
    marked = np.zeros(n, dtype=bool)
    run_start = 0
    i = 1
    while i <= len(d):
        if i < len(d) and s[i] != 0 and s[i - 1] != 0 and s[i] == -s[i - 1]:
            i += 1
            continue
        run_len = i - run_start  # diffs in the run
        if run_len + 1 >= 4 and np.all(s[run_start:i] != 0):
            marked[run_start:run_start + run_len + 1] = True
        run_start = i
        i += 1
    out["PAS"] = 100.0 * float(np.sum(marked)) / n
    return out
