"""Synthetic two-class cohorts with separable anxious/non-anxious physiology.

Anxious participants get faster hearts with less variability, higher tonic
skin conductance, and more/larger SCRs. Offsets shift a whole cohort's
physiology to rehearse cross-dataset distribution shift.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .evaluation import subseed
from .signal_io import PaqResponses, RawRecording, synthesize_ecg, synthesize_eda


@dataclass(frozen=True)
class CohortSpec:
    dataset_id: str
    n_participants: int = 10
    anxious_fraction: float = 0.5
    activity_id: str = "S1"
    duration_s: float = 120.0
    ecg_fs: float = 256.0
    eda_fs: float = 32.0
    hr_anxious: tuple = (100.0, 4.0)
    hr_non_anxious: tuple = (70.0, 4.0)
    hrv_sd_anxious: float = 15.0
    hrv_sd_non_anxious: float = 45.0
    ecg_noise_sd: float = 0.01
    tonic_anxious: tuple = (5.0, 0.5)
    tonic_non_anxious: tuple = (3.0, 0.5)
    scr_per_min_anxious: float = 4.0
    scr_per_min_non_anxious: float = 1.0
    scr_amp_anxious: tuple = (0.5, 0.1)
    scr_amp_non_anxious: tuple = (0.15, 0.04)
    hr_offset: float = 0.0
    tonic_offset: float = 0.0

    @classmethod
    def from_dict(cls, d: dict) -> "CohortSpec":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - fields
        if unknown:
            raise ValueError(f"unknown cohort fields {sorted(unknown)}")
        clean = {k: tuple(v) if isinstance(v, list) else v for k, v in d.items()}
        return cls(**clean)


def _scr_schedule(rng, rate_per_min: float, duration: float):
    count = int(round(rate_per_min * duration / 60.0))
    if count <= 0:
        return []
    # jittered grid keeps pulses >= 2 s apart deterministically
    slots = np.linspace(2.0, duration - 12.0, count)
    jitter = rng.uniform(-0.4, 0.4, size=count) * (slots[1] - slots[0] if count > 1 else 1.0)
    onsets = np.clip(slots + jitter, 1.0, duration - 10.0)
    onsets.sort()
    keep = [float(onsets[0])]
    for o in onsets[1:]:
        if o - keep[-1] >= 2.0:
            keep.append(float(o))
    return keep


def _paq_for(rng, anxious: bool) -> tuple[int, ...]:
    if anxious:
        qs = rng.integers(4, 6, size=5)
        q2 = int(rng.integers(1, 3))
    else:
        qs = rng.integers(1, 3, size=5)
        q2 = int(rng.integers(4, 6))
    return (int(qs[0]), q2, int(qs[2]), int(qs[3]), int(qs[4]))


def generate_cohort(spec: CohortSpec, seed: int):
    """Returns (recordings, paq_responses) for one synthetic cohort."""
    recordings: list[RawRecording] = []
    paq: list[PaqResponses] = []
    n_anx = int(round(spec.n_participants * spec.anxious_fraction))
    for i in range(spec.n_participants):
        anxious = i < n_anx
        pid = f"p{i:02d}"
        rng = np.random.default_rng(subseed(seed, spec.dataset_id, pid))
        hr_mu, hr_sd = spec.hr_anxious if anxious else spec.hr_non_anxious
        hr = float(np.clip(rng.normal(hr_mu, hr_sd) + spec.hr_offset, 40, 190))
        hrv_sd = spec.hrv_sd_anxious if anxious else spec.hrv_sd_non_anxious
        ecg, _ = synthesize_ecg(hr, hrv_sd, spec.duration_s, spec.ecg_fs,
                                noise_sd=spec.ecg_noise_sd,
                                seed=subseed(seed, spec.dataset_id, pid, "ecg"))

        ton_mu, ton_sd = spec.tonic_anxious if anxious else spec.tonic_non_anxious
        tonic = max(float(rng.normal(ton_mu, ton_sd) + spec.tonic_offset), 0.5)
        rate = spec.scr_per_min_anxious if anxious else spec.scr_per_min_non_anxious
        onsets = _scr_schedule(rng, rate, spec.duration_s)
        amp_mu, amp_sd = spec.scr_amp_anxious if anxious else spec.scr_amp_non_anxious
        amps = [max(float(rng.normal(amp_mu, amp_sd)), 0.02) for _ in onsets]
        eda, _ = synthesize_eda(onsets, amps, tonic, spec.duration_s, spec.eda_fs,
                                seed=subseed(seed, spec.dataset_id, pid, "eda"))

        for rec in (ecg, eda):
            recordings.append(dataclasses.replace(
                rec, dataset_id=spec.dataset_id, participant_id=pid,
                activity_id=spec.activity_id))
        paq.append(PaqResponses(pid, spec.activity_id, _paq_for(rng, anxious)))
    return recordings, paq
