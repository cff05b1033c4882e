"""Recording/questionnaire file I/O and synthetic signal generators.

The portable signal format is a plain CSV: a ``#key=value`` header block
(dataset, participant, activity, channel, fs) followed by one sample per
line. Questionnaire files are ordinary CSV with columns
``participant,activity,q1..q5``. The synthesizers return the exact event
ground truth alongside the signal so detector accuracy can be scored
against known positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataFormatError

HEADER_KEYS = ("dataset", "participant", "activity", "channel", "fs")
CHANNELS = ("ECG", "EDA")


@dataclass(frozen=True)
class RawRecording:
    """One channel of sampled physiological signal plus provenance."""

    dataset_id: str
    participant_id: str
    activity_id: str
    channel: str  # "ECG" (mV) or "EDA" (microsiemens)
    sampling_rate: float
    samples: np.ndarray

    def __post_init__(self):
        if self.channel not in CHANNELS:
            raise ValueError(f"unknown channel {self.channel!r}")
        if self.sampling_rate <= 0:
            raise ValueError("invalid sampling rate")
        samples = np.asarray(self.samples, dtype=float)
        if samples.size == 0:
            raise ValueError("empty recording")
        if not np.all(np.isfinite(samples)):
            raise ValueError("non-finite sample in recording")
        object.__setattr__(self, "samples", samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sampling_rate


@dataclass(frozen=True)
class PaqResponses:
    """Raw five-question Likert responses for one (participant, activity)."""

    participant_id: str
    activity_id: str
    scores: tuple[int, ...]

    def __post_init__(self):
        if len(self.scores) != 5:
            raise ValueError("expected exactly 5 scores")
        for s in self.scores:
            if not 1 <= s <= 5:
                raise ValueError(f"score {s} outside [1, 5]")


@dataclass(frozen=True)
class SynthGroundTruth:
    """Known event positions emitted by a synthesizer."""

    peak_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    scr_events: tuple = ()  # (onset_index, amplitude_us, rise_time_s) triples


def load_recording(path) -> RawRecording:
    """Parse one signal CSV into a RawRecording.

    Raises DataFormatError naming the offending line for missing/unknown
    header keys, non-numeric samples, or a non-positive sampling rate.
    """
    path = Path(path)
    header: dict[str, str] = {}
    samples: list[float] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" not in line:
                    raise DataFormatError(f"{path}:{lineno}: malformed header line {line!r}")
                key, value = line[1:].split("=", 1)
                key = key.strip().lower()
                if key not in HEADER_KEYS:
                    raise DataFormatError(f"{path}:{lineno}: unknown header key {key!r}")
                header[key] = value.strip()
            else:
                try:
                    samples.append(float(line))
                except ValueError:
                    raise DataFormatError(
                        f"{path}:{lineno}: non-numeric sample {line!r}") from None
    missing = [k for k in HEADER_KEYS if k not in header]
    if missing:
        raise DataFormatError(f"{path}: missing header keys {missing}")
    try:
        fs = float(header["fs"])
    except ValueError:
        raise DataFormatError(f"{path}: non-numeric fs {header['fs']!r}") from None
    if fs <= 0:
        raise DataFormatError(f"{path}: invalid sampling rate {fs}")
    if header["channel"] not in CHANNELS:
        raise DataFormatError(f"{path}: unknown channel {header['channel']!r}")
    if not samples:
        raise DataFormatError(f"{path}: no sample rows")
    arr = np.array(samples, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr))[0])
        raise DataFormatError(f"{path}: non-finite sample at data row {bad + 1}")
    return RawRecording(
        dataset_id=header["dataset"],
        participant_id=header["participant"],
        activity_id=header["activity"],
        channel=header["channel"],
        sampling_rate=fs,
        samples=arr,
    )


def save_recording(recording: RawRecording, path) -> None:
    """Write a RawRecording in the portable signal CSV format.

    Samples are written with 17 significant digits so that
    load_recording(save_recording(r)) round-trips exactly.
    """
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(f"#dataset={recording.dataset_id}\n")
        fh.write(f"#participant={recording.participant_id}\n")
        fh.write(f"#activity={recording.activity_id}\n")
        fh.write(f"#channel={recording.channel}\n")
        fh.write(f"#fs={recording.sampling_rate:.17g}\n")
        fh.write("\n".join(f"{x:.17g}" for x in recording.samples))
        fh.write("\n")


def load_paq(path) -> list[PaqResponses]:
    """Read a questionnaire CSV (participant,activity,q1..q5) as raw scores."""
    path = Path(path)
    out: list[PaqResponses] = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        expected = ["participant", "activity", "q1", "q2", "q3", "q4", "q5"]
        if [h.strip().lower() for h in header] != expected:
            raise DataFormatError(f"{path}: expected columns {expected}, got {header}")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 7:
                raise DataFormatError(f"{path}:{lineno}: expected 7 fields, got {len(parts)}")
            try:
                scores = tuple(int(p) for p in parts[2:])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-integer score") from None
            for s in scores:
                if not 1 <= s <= 5:
                    raise DataFormatError(f"{path}:{lineno}: score {s} outside [1, 5]")
            out.append(PaqResponses(parts[0], parts[1], scores))
    return out


def load_labels(path) -> dict[tuple[str, str], str]:
    """Read pre-binarized labels (participant,activity,label CSV).

    Covers sources whose raw distress scores were thresholded offline;
    label must be "Anxious" or "NonAnxious".
    """
    path = Path(path)
    out: dict[tuple[str, str], str] = {}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if [h.strip().lower() for h in header] != ["participant", "activity", "label"]:
            raise DataFormatError(f"{path}: expected columns participant,activity,label")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 3 fields")
            if parts[2] not in ("Anxious", "NonAnxious"):
                raise DataFormatError(f"{path}:{lineno}: unknown label {parts[2]!r}")
            out[(parts[0], parts[1])] = parts[2]
    return out


def _qrs_template(sampling_rate: float, width_s: float = 0.022) -> np.ndarray:
    """Mexican-hat QRS template, unit peak exactly at the center sample."""
    half = max(int(round(3 * width_s * sampling_rate)), 1)
    t = np.arange(-half, half + 1) / sampling_rate
    u = (t / width_s) ** 2
    return (1.0 - u) * np.exp(-u / 2.0)


def synthesize_ecg(heart_rate: float, hrv_sd: float, duration: float,
                   sampling_rate: float, noise_sd: float = 0.0,
                   seed: int = 0) -> tuple[RawRecording, SynthGroundTruth]:
    """Generate an ECG-like signal with known R-peak positions.

    Beat times start 0.5 s in and advance by Gaussian(60000/heart_rate,
    hrv_sd) milliseconds. A fixed Mexican-hat QRS template (unit mV peak)
    is stamped at each beat; ground truth lists the exact peak sample
    indices. Deterministic for a given (parameters, seed).
    """
    if not 30 <= heart_rate <= 220:
        raise ValueError(f"nonphysical heart rate {heart_rate} bpm")
    if duration < 10:
        raise ValueError("duration must be at least 10 s")
    if hrv_sd < 0 or noise_sd < 0 or sampling_rate <= 0:
        raise ValueError("nonphysical parameters")
    rng = np.random.default_rng(seed)
    mean_nn = 60000.0 / heart_rate

    beat_s = []
    t = 0.5
    while t < duration - 0.3:
        beat_s.append(t)
        nn = rng.normal(mean_nn, hrv_sd)
        nn = min(max(nn, 250.0), 2500.0)  # keep intervals physiological
        t += nn / 1000.0

    n = int(round(duration * sampling_rate))
    signal = np.zeros(n)
    template = _qrs_template(sampling_rate)
    half = (len(template) - 1) // 2
    peak_indices = np.array([int(round(b * sampling_rate)) for b in beat_s], dtype=int)
    for p in peak_indices:
        lo = max(p - half, 0)
        hi = min(p + half + 1, n)
        signal[lo:hi] += template[lo - (p - half):hi - (p - half)]
    # small T-wave-like bump after each QRS keeps the signal from being a
    # pure impulse train without moving the maxima
    tw = 0.18
    for p in peak_indices:
        c = p + int(round(0.20 * sampling_rate))
        halfw = int(round(0.08 * sampling_rate))
        lo, hi = max(c - halfw, 0), min(c + halfw + 1, n)
        if hi > lo:
            x = (np.arange(lo, hi) - c) / (0.05 * sampling_rate)
            signal[lo:hi] += tw * np.exp(-x * x / 2)
    if noise_sd > 0:
        signal = signal + rng.normal(0.0, noise_sd, size=n)
    rec = RawRecording("synthetic", "synth", "synth", "ECG", sampling_rate, signal)
    return rec, SynthGroundTruth(peak_indices=peak_indices)


def _scr_pulse(t: np.ndarray, rise_s: float = 0.75, decay_s: float = 4.0) -> np.ndarray:
    """Biexponential SCR pulse shape with unit peak amplitude at t_peak."""
    shape = np.zeros_like(t)
    pos = t >= 0
    tp = t[pos]
    shape[pos] = np.exp(-tp / decay_s) - np.exp(-tp / rise_s)
    t_peak = math.log(decay_s / rise_s) * rise_s * decay_s / (decay_s - rise_s)
    peak = math.exp(-t_peak / decay_s) - math.exp(-t_peak / rise_s)
    return shape / peak


def synthesize_eda(scr_onsets, amplitudes, tonic_level: float, duration: float,
                   sampling_rate: float, seed: int = 0) -> tuple[RawRecording, SynthGroundTruth]:
    """Generate an EDA-like signal: tonic level + slow drift + SCR pulses.

    Pulses are biexponential (rise ~1 s, decay ~4 s) with the requested
    peak amplitudes; onsets closer than 1 s apart are rejected. Ground
    truth echoes (onset_index, amplitude, rise_time).
    """
    scr_onsets = list(scr_onsets)
    amplitudes = list(amplitudes)
    if len(scr_onsets) != len(amplitudes):
        raise ValueError("onsets and amplitudes must pair up")
    if any(a <= 0 for a in amplitudes):
        raise ValueError("amplitudes must be positive")
    if any(not 0 <= o < duration for o in scr_onsets):
        raise ValueError("onsets must fall inside the recording")
    order = np.argsort(scr_onsets)
    onsets = [scr_onsets[i] for i in order]
    amps = [amplitudes[i] for i in order]
    for a, b in zip(onsets, onsets[1:]):
        if b - a < 1.0:
            raise ValueError(f"overlapping pulses at {a:.3f}s and {b:.3f}s (< 1 s apart)")

    rng = np.random.default_rng(seed)
    n = int(round(duration * sampling_rate))
    t = np.arange(n) / sampling_rate
    drift = 0.02 * np.sin(2 * np.pi * 0.01 * t + rng.uniform(0, 2 * np.pi))
    signal = tonic_level + drift
    rise_s, decay_s = 0.75, 4.0
    t_peak = math.log(decay_s / rise_s) * rise_s * decay_s / (decay_s - rise_s)
    events = []
    for onset, amp in zip(onsets, amps):
        pulse = _scr_pulse(t - onset, rise_s, decay_s)
        signal = signal + amp * pulse
        events.append((int(round(onset * sampling_rate)), float(amp), float(t_peak)))
    rec = RawRecording("synthetic", "synth", "synth", "EDA", sampling_rate, signal)
    return rec, SynthGroundTruth(scr_events=tuple(events))
