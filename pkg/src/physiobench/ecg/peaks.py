"""R-peak detection on band-passed ECG windows.

The detector follows the classic envelope-and-adaptive-threshold recipe:
band-limit to the QRS band (8-16 Hz), differentiate, rectify, smooth with
an 80 ms moving average, then scan the envelope maxima with a running
signal/noise threshold, a 200 ms refractory period, and a missed-beat
back-search at 1.5x the median RR. Detected positions are refined to the
local maximum of the window's own samples within +/-25 ms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal as sps

from .. import _kernels
from ..preprocess import Window

REFRACTORY_S = 0.2
SEARCH_BACK_FACTOR = 1.5
THRESHOLD_FRAC = 0.3
SEARCH_BACK_FRAC = 0.5
REFINE_S = 0.025

NN_MIN_MS = 200.0
NN_MAX_MS = 3000.0
NN_MAX_REL_JUMP = 0.5


@dataclass(frozen=True)
class RRSeries:
    """Detected R-peak indices and artifact-cleaned NN intervals (ms)."""

    peak_indices: np.ndarray
    nn_ms: np.ndarray
    sampling_rate: float

    @property
    def usable(self) -> bool:
        return len(self.nn_ms) >= 1

    @classmethod
    def from_nn(cls, nn_ms, sampling_rate: float = 1000.0) -> "RRSeries":
        """Build a series directly from NN intervals (for tests/tachograms)."""
        nn = np.asarray(nn_ms, dtype=float)
        peaks = np.concatenate([[0], np.cumsum(nn) * sampling_rate / 1000.0])
        return cls(np.round(peaks).astype(int), nn, sampling_rate)


def clean_nn(peak_indices: np.ndarray, sampling_rate: float) -> np.ndarray:
    """Inter-beat intervals in ms with artifact rejection.

    Drops intervals outside (200, 3000) ms or differing more than 50% from
    the previously retained interval.
    """
    if len(peak_indices) < 2:
        return np.array([], dtype=float)
    raw = np.diff(peak_indices) / sampling_rate * 1000.0
    kept = []
    prev = None
    for nn in raw:
        if not NN_MIN_MS < nn < NN_MAX_MS:
            continue
        if prev is not None and abs(nn - prev) > NN_MAX_REL_JUMP * prev:
            continue
        kept.append(nn)
        prev = nn
    return np.array(kept, dtype=float)


def _detection_envelope(samples: np.ndarray, fs: float) -> np.ndarray:
    high = min(16.0, 0.45 * fs)
    sos = sps.butter(2, [8.0, high], btype="band", fs=fs, output="sos")
    band = sps.sosfiltfilt(sos, samples)
    env = np.abs(np.diff(band, prepend=band[0]))
    width = max(int(round(0.08 * fs)), 1)
    kernel = np.ones(width) / width
    return np.convolve(env, kernel, mode="same")


def detect_r_peaks(window: Window) -> RRSeries:
    """Detect R-peaks in one band-passed ECG window."""
    if window.channel != "ECG":
        raise ValueError(f"expected an ECG window, got {window.channel}")
    return detect_r_peaks_array(window.samples, window.sampling_rate)


def detect_r_peaks_array(samples: np.ndarray, fs: float) -> RRSeries:
    samples = np.asarray(samples, dtype=float)
    if len(samples) < int(fs):
        return RRSeries(np.array([], dtype=int), np.array([]), fs)
    env = _detection_envelope(samples, fs)
    cand = sps.argrelmax(env, order=max(int(0.05 * fs), 1))[0]
    if len(cand) == 0:
        return RRSeries(np.array([], dtype=int), np.array([]), fs)

    refractory = int(round(REFRACTORY_S * fs))
    # per-second envelope maxima over the first seconds estimate true QRS
    # heights; seeding with all candidates would drown them in sidelobes
    sec = int(fs)
    n_chunks = min(max(len(samples) // sec, 1), 8)
    seed = np.array([env[k * sec:(k + 1) * sec].max() for k in range(n_chunks)])
    accepted, na = _kernels.peak_threshold_scan(
        env, cand.astype(np.int64), refractory, SEARCH_BACK_FACTOR,
        THRESHOLD_FRAC, SEARCH_BACK_FRAC, seed)
    accepted = np.asarray(accepted[:na])

    # refine to the local raw-window maximum
    half = int(round(REFINE_S * fs))
    refined = []
    for p in accepted:
        lo = max(p - half, 0)
        hi = min(p + half + 1, len(samples))
        refined.append(lo + int(np.argmax(samples[lo:hi])))
    refined = np.unique(np.array(refined, dtype=int))
    if len(refined) < 2:
        return RRSeries(refined, np.array([]), fs)
    return RRSeries(refined, clean_nn(refined, fs), fs)
