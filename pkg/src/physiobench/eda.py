"""Electrodermal activity: tonic/phasic split, SCR events, Haar bands, F5."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .preprocess import Window, lowpass_filter

NAN = float("nan")

# the median window must dwarf a single response (~10 s above noise for a
# 1 s rise / 4 s decay pulse) or the median rides up with the pulse and
# eats most of its amplitude; 30 s keeps the loss below ~5%
TONIC_MEDIAN_S = 30.0
TONIC_GRID_S = 0.25
SCR_MIN_AMPLITUDE_US = 0.01
WAVELET_TARGETS_HZ = (4.0, 2.0, 1.0)


@dataclass(frozen=True)
class EdaDecomposition:
    tonic: np.ndarray
    phasic: np.ndarray
    sampling_rate: float


@dataclass(frozen=True)
class ScrEvent:
    """One skin-conductance response located on the phasic trace."""

    onset_index: int
    peak_index: int
    amplitude: float
    rise_time: float
    recovery_time: float  # NaN when the 50% decay point is never reached
    duration: float       # onset to recovery; NaN when recovery is NaN

    def __post_init__(self):
        if self.onset_index >= self.peak_index:
            raise ValueError("onset must precede peak")
        if self.amplitude <= 0:
            raise ValueError("amplitude must be positive")


def decompose(window: Window, median_s: float = TONIC_MEDIAN_S) -> EdaDecomposition:
    """Split a low-passed EDA window into tonic and phasic parts.

    Tonic is a moving median re-smoothed with the 5 Hz low-pass; phasic is
    the remainder, so tonic + phasic reconstructs the input exactly.
    """
    if window.channel != "EDA":
        raise ValueError(f"expected an EDA window, got {window.channel}")
    return decompose_array(window.samples, window.sampling_rate, median_s)


def decompose_array(samples: np.ndarray, fs: float,
                    median_s: float = TONIC_MEDIAN_S) -> EdaDecomposition:
    samples = np.asarray(samples, dtype=float)
    n = len(samples)
    half = max(int(round(median_s * fs / 2)), 1)
    padded = np.concatenate([np.full(half, samples[0]), samples,
                             np.full(half, samples[-1])])
    # exact medians on a coarse grid, interpolated back to full rate
    step = max(int(round(TONIC_GRID_S * fs)), 1)
    grid = np.arange(0, n, step)
    if grid[-1] != n - 1:
        grid = np.append(grid, n - 1)
    med = np.array([np.median(padded[g:g + 2 * half + 1]) for g in grid])
    tonic = np.interp(np.arange(n), grid, med)
    if fs / 2.0 > 5.0:
        tonic = lowpass_filter(tonic, fs)
    return EdaDecomposition(tonic=tonic, phasic=samples - tonic, sampling_rate=fs)


def detect_scr(decomp: EdaDecomposition) -> list[ScrEvent]:
    """Trough-to-peak SCR events on the phasic trace.

    A local maximum qualifies when it rises at least 0.01 uS above the
    preceding trough; recovery is the first crossing of 50% of the
    amplitude after the peak.
    """
    phasic = decomp.phasic
    fs = decomp.sampling_rate
    n = len(phasic)
    if n < 3:
        return []
    d = np.diff(phasic)
    peaks = np.flatnonzero((d[:-1] > 0) & (d[1:] <= 0)) + 1
    troughs = np.flatnonzero((d[:-1] <= 0) & (d[1:] > 0)) + 1
    events: list[ScrEvent] = []
    for p in peaks:
        prior = troughs[troughs < p]
        onset = int(prior[-1]) if len(prior) else int(np.argmin(phasic[:p]))
        amplitude = float(phasic[p] - phasic[onset])
        if amplitude < SCR_MIN_AMPLITUDE_US or onset >= p:
            continue
        half_level = phasic[p] - 0.5 * amplitude
        below = np.flatnonzero(phasic[p:] <= half_level)
        if len(below):
            rec_idx = p + int(below[0])
            recovery_time = (rec_idx - p) / fs
            duration = (rec_idx - onset) / fs
        else:
            recovery_time = NAN
            duration = NAN
        events.append(ScrEvent(onset_index=onset, peak_index=int(p),
                               amplitude=amplitude, rise_time=(p - onset) / fs,
                               recovery_time=recovery_time, duration=duration))
    return events


def _haar_level(fs: float, target_hz: float) -> int:
    """Detail level whose band (fs/2^(k+1), fs/2^k] contains the target."""
    ratio = fs / target_hz
    if ratio < 2.0:
        return 0  # band not representable at this rate
    return int(math.floor(math.log2(ratio)))


def haar_dwt(signal: np.ndarray, levels: int) -> list[np.ndarray]:
    """Plain Haar cascade; returns detail coefficients for levels 1..levels."""
    approx = np.asarray(signal, dtype=float)
    details = []
    for _ in range(levels):
        if len(approx) < 2:
            break
        m = len(approx) // 2
        pairs = approx[:2 * m].reshape(m, 2)
        details.append((pairs[:, 0] - pairs[:, 1]) / np.sqrt(2))
        approx = (pairs[:, 0] + pairs[:, 1]) / np.sqrt(2)
    return details


def wavelet_bands(signal: np.ndarray, sampling_rate: float) -> dict:
    """Haar detail coefficients for the 4, 2, and 1 Hz bands.

    A band the sampling rate cannot host maps to None.
    """
    signal = np.asarray(signal, dtype=float)
    levels = {}
    max_level = 0
    for target in WAVELET_TARGETS_HZ:
        k = _haar_level(sampling_rate, target)
        levels[target] = k
        max_level = max(max_level, k)
    details = haar_dwt(signal, max_level)
    out = {}
    for target, k in levels.items():
        if k < 1 or k > len(details):
            out[target] = None
        else:
            out[target] = details[k - 1]
    return out


F5_NAMES = (
    "SCR_Duration_Mean", "SCR_Amplitude_Mean", "SCR_RiseTime_Mean",
    "SCR_D1_Mean", "SCR_D2_Mean", "SCR_Wavelet4Hz_Mean",
    "SCR_Duration_Max", "SCR_Amplitude_Max", "SCR_RiseTime_Max",
    "SCR_RecoveryTime_Max", "SCR_Duration_Min", "SCR_Amplitude_Min",
    "SCR_Phasic_Median", "SCR_Wavelet4Hz_Median", "SCR_Wavelet4Hz_SD",
    "SCR_Slope",
)


def _stat(values, fn) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return float(fn(vals)) if vals else NAN


def eda_features(decomp: EdaDecomposition, events: list[ScrEvent],
                 bands: dict) -> dict:
    """The 16-value EDA feature vector for one window.

    Event statistics go missing when no events were detected; trace-level
    statistics (derivatives, medians, slope, wavelet stats) are always
    computed.
    """
    phasic = decomp.phasic
    fs = decomp.sampling_rate
    out = {name: NAN for name in F5_NAMES}

    if events:
        out["SCR_Duration_Mean"] = _stat([e.duration for e in events], np.mean)
        out["SCR_Amplitude_Mean"] = _stat([e.amplitude for e in events], np.mean)
        out["SCR_RiseTime_Mean"] = _stat([e.rise_time for e in events], np.mean)
        out["SCR_Duration_Max"] = _stat([e.duration for e in events], np.max)
        out["SCR_Amplitude_Max"] = _stat([e.amplitude for e in events], np.max)
        out["SCR_RiseTime_Max"] = _stat([e.rise_time for e in events], np.max)
        out["SCR_RecoveryTime_Max"] = _stat([e.recovery_time for e in events], np.max)
        out["SCR_Duration_Min"] = _stat([e.duration for e in events], np.min)
        out["SCR_Amplitude_Min"] = _stat([e.amplitude for e in events], np.min)

    d1 = np.gradient(phasic) * fs
    d2 = np.gradient(d1) * fs
    out["SCR_D1_Mean"] = float(np.mean(d1))
    out["SCR_D2_Mean"] = float(np.mean(d2))
    out["SCR_Phasic_Median"] = float(np.median(phasic))

    w4 = bands.get(4.0)
    if w4 is not None and len(w4):
        out["SCR_Wavelet4Hz_Mean"] = float(np.mean(w4))
        out["SCR_Wavelet4Hz_Median"] = float(np.median(w4))
        out["SCR_Wavelet4Hz_SD"] = float(np.std(w4, ddof=1)) if len(w4) > 1 else NAN

    t = np.arange(len(phasic)) / fs
    out["SCR_Slope"] = float(np.polyfit(t, phasic, 1)[0]) if len(phasic) > 1 else NAN
    return out
