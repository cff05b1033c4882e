"""Filtering, resampling, and sliding-window segmentation."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import signal as sps

from .signal_io import RawRecording

ECG_BAND = (1.0, 49.0)
EDA_CUTOFF = 5.0
WINDOW_S = 60.0
SHIFT_S = 0.25

# forward-backward pass doubles attenuation in dB; order 6 is the lowest
# Butterworth order whose two-pass response clears 20 dB one decade past
# the upper edge while order 4 suffices for the single-edge low-pass
ECG_BANDPASS_ORDER = 6
EDA_LOWPASS_ORDER = 4


@dataclass(frozen=True)
class Window:
    """One sliding-window slice of a filtered recording."""

    dataset_id: str
    participant_id: str
    activity_id: str
    channel: str
    sampling_rate: float
    start_index: int
    samples: np.ndarray

    @property
    def length(self) -> int:
        return len(self.samples)

    @property
    def start_time(self) -> float:
        return self.start_index / self.sampling_rate


def _zero_phase(sos, x: np.ndarray, order: int) -> np.ndarray:
    padlen = min(3 * 2 * order, len(x) - 1)
    return sps.sosfiltfilt(sos, x, padtype="even", padlen=padlen)


def bandpass_filter(signal, sampling_rate: float, low: float = ECG_BAND[0],
                    high: float = ECG_BAND[1], order: int = ECG_BANDPASS_ORDER) -> np.ndarray:
    """Zero-phase Butterworth band-pass; output length equals input length."""
    signal = np.asarray(signal, dtype=float)
    nyq = sampling_rate / 2.0
    if not 0 < low < high:
        raise ValueError(f"need 0 < low < high, got ({low}, {high})")
    if high >= nyq:
        raise ValueError(f"high cutoff {high} Hz at or above Nyquist {nyq} Hz")
    sos = sps.butter(order, [low, high], btype="band", fs=sampling_rate, output="sos")
    return _zero_phase(sos, signal, order)


def lowpass_filter(signal, sampling_rate: float, cutoff: float = EDA_CUTOFF,
                   order: int = EDA_LOWPASS_ORDER) -> np.ndarray:
    """Zero-phase Butterworth low-pass; output length equals input length."""
    signal = np.asarray(signal, dtype=float)
    nyq = sampling_rate / 2.0
    if cutoff <= 0:
        raise ValueError(f"cutoff must be positive, got {cutoff}")
    if cutoff >= nyq:
        raise ValueError(f"cutoff {cutoff} Hz at or above Nyquist {nyq} Hz")
    sos = sps.butter(order, cutoff, btype="low", fs=sampling_rate, output="sos")
    return _zero_phase(sos, signal, order)


def filter_recording(rec: RawRecording) -> np.ndarray:
    """Apply the channel's default filter to a whole recording."""
    if rec.channel == "ECG":
        return bandpass_filter(rec.samples, rec.sampling_rate)
    return lowpass_filter(rec.samples, rec.sampling_rate)


def segment_windows(signal, sampling_rate: float, window: float = WINDOW_S,
                    shift: float = SHIFT_S, *, dataset_id: str = "",
                    participant_id: str = "", activity_id: str = "",
                    channel: str = "ECG") -> list[Window]:
    """Slice a (filtered) signal into sliding windows.

    Yields floor((duration - window)/shift) + 1 windows ordered by start
    index; a signal shorter than one window produces an empty list and a
    warning.
    """
    signal = np.asarray(signal, dtype=float)
    win_n = int(round(window * sampling_rate))
    shift_n = int(round(shift * sampling_rate))
    if shift_n < 1:
        raise ValueError("shift shorter than one sample")
    if len(signal) < win_n:
        warnings.warn("signal shorter than one window; no windows produced",
                      stacklevel=2)
        return []
    count = (len(signal) - win_n) // shift_n + 1
    out = []
    for k in range(count):
        start = k * shift_n
        out.append(Window(dataset_id, participant_id, activity_id, channel,
                          sampling_rate, start, signal[start:start + win_n]))
    return out


def windows_from_recording(rec: RawRecording, filtered: np.ndarray,
                           window: float = WINDOW_S, shift: float = SHIFT_S) -> list[Window]:
    return segment_windows(filtered, rec.sampling_rate, window, shift,
                           dataset_id=rec.dataset_id,
                           participant_id=rec.participant_id,
                           activity_id=rec.activity_id, channel=rec.channel)


def resample(signal, from_fs: float, to_fs: float) -> np.ndarray:
    """Linear-interpolation resampling onto a uniform grid at to_fs."""
    if from_fs <= 0 or to_fs <= 0:
        raise ValueError("sampling rates must be positive")
    signal = np.asarray(signal, dtype=float)
    if from_fs == to_fs:
        return signal.copy()
    n_out = int(round(len(signal) * to_fs / from_fs))
    t_in = np.arange(len(signal)) / from_fs
    t_out = np.arange(n_out) / to_fs
    return np.interp(t_out, t_in, signal)
