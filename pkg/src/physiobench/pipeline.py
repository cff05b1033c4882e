"""Feature-matrix assembly: schema, labeling, cleaning, and projections."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import eda as eda_mod
from .ecg import (asymmetry, detect_r_peaks, entropy_suite, fractal_suite,
                  fragmentation, frequency_domain, mfdfa_alpha1, poincare,
                  rqa, time_domain)
from .errors import DataFormatError, SchemaError
from .preprocess import Window
from .signal_io import PaqResponses

NAN = float("nan")

FEATURE_SETS = ("F1", "F2", "F3", "F4", "F5")

F1_NAMES = ("MeanNN", "SDNN", "MadNN", "MinNN", "TINN")
F2_NAMES = ("LF", "HF", "VHF", "LF_HF")
F3_NAMES = (
    "SD1", "CSI_Modified", "PIP", "PAS", "GI", "PI", "C1d", "C2d",
    "MFDFA_alpha1_Width", "MFDFA_alpha1_Peak", "MFDFA_alpha1_Mean",
    "MFDFA_alpha1_Max", "MFDFA_alpha1_Fluctuation",
    "ApEn", "SampEn", "ShanEn", "MSEn", "CMSEn", "HFD", "KFD", "LZC",
)
F4_NAMES = ("RecurrenceRate", "DiagRec", "Determinism", "L", "W", "WMax")
F5_NAMES = eda_mod.F5_NAMES

SET_NAMES = {"F1": F1_NAMES, "F2": F2_NAMES, "F3": F3_NAMES,
             "F4": F4_NAMES, "F5": F5_NAMES}
NAME_TO_SET = {name: fset for fset, names in SET_NAMES.items() for name in names}
ALL_NAMES = tuple(itertools.chain.from_iterable(SET_NAMES[s] for s in FEATURE_SETS))

LABEL_ANXIOUS = "Anxious"
LABEL_NON_ANXIOUS = "NonAnxious"
PAQ_THRESHOLD = 15


@dataclass
class FeatureMatrix:
    """Window rows x named feature columns with labels and group keys."""

    feature_names: list[str]
    values: np.ndarray             # rows x features, NaN = missing
    labels: np.ndarray             # 1 = Anxious, 0 = NonAnxious
    groups: list[tuple[str, str, str]]  # (dataset, participant, activity)
    unusable: np.ndarray = field(default=None)  # per-row flag

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be 2-D")
        if self.values.shape[1] != len(self.feature_names):
            raise ValueError("column count does not match feature names")
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.labels) != self.values.shape[0]:
            raise ValueError("labels must cover every row")
        if len(self.groups) != self.values.shape[0]:
            raise ValueError("group keys must cover every row")
        if self.unusable is None:
            self.unusable = np.zeros(self.values.shape[0], dtype=bool)
        else:
            self.unusable = np.asarray(self.unusable, dtype=bool)

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def sets(self) -> list[str]:
        return [NAME_TO_SET[n] for n in self.feature_names]

    def select_columns(self, keep: list[int]) -> "FeatureMatrix":
        return FeatureMatrix([self.feature_names[i] for i in keep],
                             self.values[:, keep], self.labels.copy(),
                             list(self.groups), self.unusable.copy())

    def select_rows(self, idx) -> "FeatureMatrix":
        idx = np.asarray(idx)
        return FeatureMatrix(list(self.feature_names), self.values[idx],
                             self.labels[idx],
                             [self.groups[i] for i in np.flatnonzero(idx)]
                             if idx.dtype == bool else [self.groups[i] for i in idx],
                             self.unusable[idx])


def label_from_paq(responses: PaqResponses) -> str:
    """Anxious iff q1 + (6 - q2) + q3 + q4 + q5 >= 15 (q2 reverse-scored)."""
    q1, q2, q3, q4, q5 = responses.scores
    score = q1 + (6 - q2) + q3 + q4 + q5
    return LABEL_ANXIOUS if score >= PAQ_THRESHOLD else LABEL_NON_ANXIOUS


def compute_ecg_window_features(window: Window) -> tuple[dict, bool]:
    """All F1-F4 values for one band-passed ECG window.

    Returns (features, usable); an unusable window (fewer than 2 peaks)
    yields all-missing features.
    """
    rr = detect_r_peaks(window)
    if not rr.usable:
        names = F1_NAMES + F2_NAMES + F3_NAMES + F4_NAMES
        return {n: NAN for n in names}, False
    out = {}
    out.update(time_domain(rr))
    freq = frequency_domain(rr)
    for band in ("LF", "HF", "VHF"):
        p = freq[band]
        out[band] = math.log(p) if p > 0 else NAN
    out["LF_HF"] = freq["LF_HF"]
    out.update(poincare(rr))
    out.update(fragmentation(rr))
    out.update(asymmetry(rr))
    out.update(entropy_suite(rr))
    out.update(mfdfa_alpha1(rr))
    out.update(fractal_suite(rr))
    out.update(rqa(rr))
    return out, True


def compute_eda_window_features(window: Window) -> tuple[dict, bool]:
    """All F5 values for one low-passed EDA window."""
    decomp = eda_mod.decompose(window)
    events = eda_mod.detect_scr(decomp)
    bands = eda_mod.wavelet_bands(decomp.phasic, window.sampling_rate)
    return eda_mod.eda_features(decomp, events, bands), True


def drop_missing(matrix: FeatureMatrix) -> FeatureMatrix:
    """Column-first missing-value removal.

    Columns with any missing value among usable rows go first; rows
    flagged unusable are removed afterwards.
    """
    usable = ~matrix.unusable
    keep_cols = [j for j in range(len(matrix.feature_names))
                 if not np.any(np.isnan(matrix.values[usable, j]))]
    out = matrix.select_columns(keep_cols)
    out = out.select_rows(usable)
    return out


def _pearson(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        return NAN
    return float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))


def correlation_prune(matrix: FeatureMatrix, threshold: float = 0.75) -> FeatureMatrix:
    """Drop the later column of any pair with |Pearson r| > threshold.

    Constant columns are dropped first; iteration follows the matrix's
    canonical column order, so the result is deterministic and idempotent.
    """
    values = matrix.values
    n = len(matrix.feature_names)
    alive = [j for j in range(n) if np.std(values[:, j]) > 0]
    dropped = set(range(n)) - set(alive)
    for ai, i in enumerate(alive):
        if i in dropped:
            continue
        for j in alive[ai + 1:]:
            if j in dropped:
                continue
            r = _pearson(values[:, i], values[:, j])
            if not math.isnan(r) and abs(r) > threshold:
                dropped.add(j)
    keep = [j for j in range(n) if j not in dropped]
    return matrix.select_columns(keep)


def enumerate_combos() -> list[tuple[str, ...]]:
    """All 31 non-empty feature-set subsets, ordered by size then name."""
    out = []
    for size in range(1, len(FEATURE_SETS) + 1):
        out.extend(itertools.combinations(FEATURE_SETS, size))
    return out


def combo_name(combo) -> str:
    return "+".join(combo)


def project(matrix: FeatureMatrix, combo) -> FeatureMatrix:
    """Keep exactly the columns whose feature-set tag is in the combo."""
    combo = set(combo)
    unknown = combo - set(FEATURE_SETS)
    if unknown:
        raise ValueError(f"unknown feature sets {sorted(unknown)}")
    keep = [j for j, name in enumerate(matrix.feature_names)
            if NAME_TO_SET[name] in combo]
    return matrix.select_columns(keep)


def standardize(train: FeatureMatrix, apply_to: FeatureMatrix) -> FeatureMatrix:
    """Z-score apply_to using the training split's means and SDs.

    Zero-SD columns pass through unscaled.
    """
    if train.feature_names != apply_to.feature_names:
        raise SchemaError("train/apply schemas differ")
    mean = train.values.mean(axis=0)
    sd = train.values.std(axis=0)
    scaled = apply_to.values.copy()
    nz = sd > 0
    scaled[:, nz] = (scaled[:, nz] - mean[nz]) / sd[nz]
    return FeatureMatrix(list(apply_to.feature_names), scaled,
                         apply_to.labels.copy(), list(apply_to.groups),
                         apply_to.unusable.copy())


def standardize_pair(train: FeatureMatrix, test: FeatureMatrix):
    return standardize(train, train), standardize(train, test)


# --- matrix CSV round-trip ---------------------------------------------------

def save_matrix(matrix: FeatureMatrix, path) -> None:
    """Write `feature:<set>:<name>` columns plus label and group keys."""
    with open(path, "w") as fh:
        cols = [f"feature:{NAME_TO_SET[n]}:{n}" for n in matrix.feature_names]
        fh.write(",".join(cols + ["label", "dataset", "participant", "activity"]))
        fh.write("\n")
        for i in range(matrix.n_rows):
            vals = [f"{v:.17g}" if not math.isnan(v) else "" for v in matrix.values[i]]
            label = LABEL_ANXIOUS if matrix.labels[i] == 1 else LABEL_NON_ANXIOUS
            fh.write(",".join(vals + [label, *matrix.groups[i]]))
            fh.write("\n")


def load_matrix(path) -> FeatureMatrix:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        feature_names = []
        for col in header:
            if col.startswith("feature:"):
                parts = col.split(":")
                if len(parts) != 3 or parts[1] not in FEATURE_SETS:
                    raise DataFormatError(f"{path}: bad feature column {col!r}")
                if parts[2] not in NAME_TO_SET or NAME_TO_SET[parts[2]] != parts[1]:
                    raise DataFormatError(f"{path}: unknown feature {parts[2]!r}")
                feature_names.append(parts[2])
        tail = header[len(feature_names):]
        if tail != ["label", "dataset", "participant", "activity"]:
            raise DataFormatError(f"{path}: expected label/group columns, got {tail}")
        rows, labels, groups = [], [], []
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise DataFormatError(f"{path}:{lineno}: wrong field count")
            feat = parts[:len(feature_names)]
            rows.append([float(v) if v else NAN for v in feat])
            label = parts[len(feature_names)]
            if label not in (LABEL_ANXIOUS, LABEL_NON_ANXIOUS):
                raise DataFormatError(f"{path}:{lineno}: unknown label {label!r}")
            labels.append(1 if label == LABEL_ANXIOUS else 0)
            groups.append(tuple(parts[len(feature_names) + 1:]))
    values = np.array(rows, dtype=float) if rows else np.empty((0, len(feature_names)))
    return FeatureMatrix(feature_names, values, np.array(labels, dtype=int), groups)


def concat_matrices(matrices: list[FeatureMatrix]) -> FeatureMatrix:
    """Stack matrices sharing a schema into one."""
    if not matrices:
        raise ValueError("nothing to concatenate")
    names = matrices[0].feature_names
    for m in matrices[1:]:
        if m.feature_names != names:
            raise SchemaError("matrices have different feature schemas")
    return FeatureMatrix(
        list(names),
        np.vstack([m.values for m in matrices]),
        np.concatenate([m.labels for m in matrices]),
        [g for m in matrices for g in m.groups],
        np.concatenate([m.unusable for m in matrices]),
    )


def align_schemas(matrices: dict) -> dict:
    """Restrict every matrix to the canonically ordered shared columns."""
    shared = None
    for m in matrices.values():
        names = set(m.feature_names)
        shared = names if shared is None else shared & names
    ordered = [n for n in ALL_NAMES if n in (shared or set())]
    out = {}
    for key, m in matrices.items():
        idx = [m.feature_names.index(n) for n in ordered]
        out[key] = m.select_columns(idx)
    return out


ECG_FEATURE_NAMES = F1_NAMES + F2_NAMES + F3_NAMES + F4_NAMES


def build_feature_matrix(recordings, labels_map: dict, window_s: float = 60.0,
                         shift_s: float = 0.25) -> FeatureMatrix:
    """Window every recording and assemble the full F1-F5 matrix.

    Windows pair across channels by start time; a row whose ECG or EDA
    side is absent or unusable is flagged unusable (drop_missing removes
    it without costing the other rows their columns).
    """
    from .preprocess import filter_recording, windows_from_recording

    by_key: dict[tuple, dict] = {}
    for rec in recordings:
        key = (rec.dataset_id, rec.participant_id, rec.activity_id)
        if rec.channel in by_key.setdefault(key, {}):
            raise DataFormatError(f"duplicate {rec.channel} recording for {key}")
        by_key[key][rec.channel] = rec

    rows, labels, groups, unusable = [], [], [], []
    for key in sorted(by_key):
        label = labels_map.get((key[1], key[2]))
        if label is None:
            raise DataFormatError(
                f"labels unavailable for participant={key[1]} activity={key[2]}")
        windows = {}
        for channel, rec in by_key[key].items():
            filtered = filter_recording(rec)
            windows[channel] = windows_from_recording(rec, filtered, window_s, shift_s)
        n_rows = max((len(w) for w in windows.values()), default=0)
        for k in range(n_rows):
            feats = {}
            row_ok = True
            ecg_wins = windows.get("ECG", [])
            if k < len(ecg_wins):
                vals, ok = compute_ecg_window_features(ecg_wins[k])
                feats.update(vals)
                row_ok &= ok
            else:
                feats.update({n: NAN for n in ECG_FEATURE_NAMES})
                row_ok = False
            eda_wins = windows.get("EDA", [])
            if k < len(eda_wins):
                vals, ok = compute_eda_window_features(eda_wins[k])
                feats.update(vals)
                row_ok &= ok
            else:
                feats.update({n: NAN for n in F5_NAMES})
                row_ok = False
            rows.append([feats[n] for n in ALL_NAMES])
            labels.append(1 if label == LABEL_ANXIOUS else 0)
            groups.append(key)
            unusable.append(not row_ok)

    values = np.array(rows, dtype=float) if rows else np.empty((0, len(ALL_NAMES)))
    return FeatureMatrix(list(ALL_NAMES), values, np.array(labels, dtype=int),
                         groups, np.array(unusable, dtype=bool))


def labels_from_paq(responses) -> dict[tuple[str, str], str]:
    return {(r.participant_id, r.activity_id): label_from_paq(r) for r in responses}


def per_set_counts(matrix: FeatureMatrix) -> dict[str, tuple[int, int]]:
    """(anxious, non-anxious) row counts with a complete value set, per
    feature set; the shape of the per-dataset label-distribution table."""
    out = {}
    usable = ~matrix.unusable
    sets = matrix.sets()
    for fset in FEATURE_SETS:
        cols = [j for j, s in enumerate(sets) if s == fset]
        if not cols:
            out[fset] = (0, 0)
            continue
        complete = usable & ~np.any(np.isnan(matrix.values[:, cols]), axis=1)
        out[fset] = (int(np.sum(complete & (matrix.labels == 1))),
                     int(np.sum(complete & (matrix.labels == 0))))
    return out
