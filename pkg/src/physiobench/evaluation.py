"""Cross-validation, the recall-gated selection rule, and the full
within/cross train-test evaluation matrix."""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import models as models_mod
from .errors import SchemaError
from .metrics import EvalTuple, auroc, confusion, recalls
from .pipeline import (FeatureMatrix, combo_name, concat_matrices,
                       enumerate_combos, project, standardize_pair)

NAN = float("nan")

MIN_NON_ANXIOUS_RECALL = 50.0
STANDARDIZED_MODELS = {"C1", "C4", "DNN"}
CLASSIFIER_RANK = {cid: i for i, cid in enumerate(models_mod.CLASSIFIER_IDS)}

WITHIN_KFOLD = "WithinKFold"
CROSS_DATASET = "CrossDataset"


@dataclass(frozen=True)
class TrainTestConfig:
    """One train/test cell of the generalizability matrix."""

    train: tuple[str, ...]
    test: str
    mode: str

    def __post_init__(self):
        object.__setattr__(self, "train", tuple(self.train))
        if self.mode == WITHIN_KFOLD:
            if set(self.train) != {self.test}:
                raise ValueError("within-dataset cells require train == {test}")
        elif self.mode == CROSS_DATASET:
            if self.test in self.train:
                raise ValueError("cross-dataset cells require test not in train")
        else:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def key(self) -> str:
        return f"{'+'.join(self.train)}->{self.test}:{self.mode}"


def subseed(seed: int, *names) -> int:
    """Stable named sub-seed so partial reruns reproduce full-run results."""
    text = ":".join([str(seed), *map(str, names)])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


def stratified_kfold(labels, k: int = 5, seed: int = 0):
    """Seeded stratified folds: per-fold class counts differ by <= 1."""
    labels = np.asarray(labels, dtype=int)
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    for offset, cls in enumerate(np.unique(labels)):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise ValueError(f"k={k} exceeds class count {len(idx)}")
        idx = rng.permutation(idx)
        for i, row in enumerate(idx):
            folds[(i + offset) % k].append(int(row))
    out = []
    all_idx = np.arange(len(labels))
    for f in folds:
        test = np.sort(np.array(f, dtype=int))
        train = np.setdiff1d(all_idx, test)
        out.append((train, test))
    return out


def select_best(candidates) -> EvalTuple | None:
    """The paper-style rule: require >= 50% non-anxious recall, then take
    the highest anxious recall (ties: higher AUROC, lower classifier index)."""
    survivors = [c for c in candidates
                 if not math.isnan(c.recall_non_anxious)
                 and not math.isnan(c.recall_anxious)
                 and c.recall_non_anxious >= MIN_NON_ANXIOUS_RECALL]
    if not survivors:
        return None
    def rank(c: EvalTuple):
        a = c.auroc if not math.isnan(c.auroc) else -1.0
        return (-c.recall_anxious, -a, CLASSIFIER_RANK.get(c.classifier_id, 99))
    return min(survivors, key=rank)


def select_best_combo(per_combo_best: dict) -> tuple | None:
    """Across combos: max AUROC, ties to higher anxious recall then
    canonical combo order."""
    order = {c: i for i, c in enumerate(enumerate_combos())}
    items = [(combo, ev) for combo, ev in per_combo_best.items() if ev is not None]
    if not items:
        return None
    def rank(item):
        combo, ev = item
        a = ev.auroc if not math.isnan(ev.auroc) else -1.0
        return (-a, -ev.recall_anxious, order.get(tuple(combo), 999))
    return min(items, key=rank)


def _fit_and_score(cid, train_mat: FeatureMatrix, test_mat: FeatureMatrix,
                   seed: int, hyper: dict | None):
    if cid in STANDARDIZED_MODELS:
        train_mat, test_mat = standardize_pair(train_mat, test_mat)
    model = models_mod.train(cid, train_mat.values, train_mat.labels,
                             hyper=hyper, seed=seed,
                             feature_names=train_mat.feature_names)
    scores = models_mod.predict_score(model, test_mat.values,
                                      feature_names=test_mat.feature_names)
    preds = (scores >= model.threshold).astype(int)
    conf = confusion(test_mat.labels, preds)
    r_anx, r_non = recalls(conf)
    return auroc(scores, test_mat.labels), r_anx, r_non


def run_cell(config: TrainTestConfig, combo, classifiers, matrices: dict,
             seed: int, hyper: dict | None = None):
    """Evaluate every classifier on one (config, combo) cell.

    Returns (candidates, selected): all per-classifier tuples plus the
    recall-gated pick (None when nothing clears the gate).
    """
    hyper = hyper or {}
    for ds in (*config.train, config.test):
        if ds not in matrices:
            raise ValueError(f"dataset {ds!r} missing from matrices")
    test_all = project(matrices[config.test], combo)
    train_all = (test_all if config.mode == WITHIN_KFOLD else
                 concat_matrices([project(matrices[d], combo) for d in config.train]))
    if train_all.feature_names != test_all.feature_names:
        raise SchemaError("train/test schemas differ after projection")

    candidates = []
    for cid in classifiers:
        cell_seed = subseed(seed, config.key, combo_name(combo), cid)
        if config.mode == WITHIN_KFOLD:
            folds = stratified_kfold(test_all.labels, k=5,
                                     seed=subseed(seed, config.key, combo_name(combo)))
            per_fold = []
            for train_idx, test_idx in folds:
                per_fold.append(_fit_and_score(
                    cid, test_all.select_rows(train_idx),
                    test_all.select_rows(test_idx), cell_seed, hyper.get(cid)))
            arr = np.array(per_fold, dtype=float)
            with np.errstate(invalid="ignore"):
                means = np.nanmean(arr, axis=0)
            candidates.append(EvalTuple(float(means[0]), float(means[1]),
                                        float(means[2]), cid))
        else:
            a, r_anx, r_non = _fit_and_score(cid, train_all, test_all,
                                             cell_seed, hyper.get(cid))
            candidates.append(EvalTuple(a, r_anx, r_non, cid))
    return candidates, select_best(candidates)


def _cell_job(args):
    config, combo, classifiers, matrices, seed, hyper = args
    candidates, best = run_cell(config, combo, classifiers, matrices, seed, hyper)
    return config.key, combo, candidates, best


@dataclass
class MatrixReport:
    records: list = field(default_factory=list)
    best_per_cell: dict = field(default_factory=dict)
    best_in_column: dict = field(default_factory=dict)
    model_count: int = 0


def run_matrix(configs, combos, classifiers, matrices: dict, seed: int,
               hyper: dict | None = None, workers: int = 1) -> MatrixReport:
    """Evaluate every (config, combo, classifier) and assemble the report.

    Records carry every candidate tuple; `selected` marks the recall-gated
    winner within its cell and `best_in_column` the winning combo per
    config column. Assembly order is canonical, so outputs are identical
    regardless of worker count.
    """
    jobs = [(config, combo, tuple(classifiers), matrices, seed, hyper)
            for config in configs for combo in combos]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell_job, jobs, chunksize=4))
    else:
        results = [_cell_job(j) for j in jobs]
    by_key = {(key, tuple(combo)): (cands, best)
              for key, combo, cands, best in results}

    report = MatrixReport()
    for config in configs:
        per_combo_best = {}
        for combo in combos:
            cands, best = by_key[(config.key, tuple(combo))]
            per_combo_best[tuple(combo)] = best
            for ev in cands:
                report.records.append({
                    "config": config.key,
                    "train": "+".join(config.train),
                    "test": config.test,
                    "mode": config.mode,
                    "combo": combo_name(combo),
                    "classifier": ev.classifier_id,
                    "auroc": None if math.isnan(ev.auroc) else ev.auroc,
                    "recall_anxious": None if math.isnan(ev.recall_anxious) else ev.recall_anxious,
                    "recall_non_anxious": None if math.isnan(ev.recall_non_anxious) else ev.recall_non_anxious,
                    "selected": best is not None and ev.classifier_id == best.classifier_id,
                    "best_in_column": False,
                })
            report.model_count += len(cands)
        report.best_per_cell[config.key] = {
            combo_name(c): ev for c, ev in per_combo_best.items()}
        winner = select_best_combo(per_combo_best)
        if winner is not None:
            combo, ev = winner
            report.best_in_column[config.key] = (combo_name(combo), ev)
            for rec in report.records:
                if (rec["config"] == config.key
                        and rec["combo"] == combo_name(combo)
                        and rec["classifier"] == ev.classifier_id):
                    rec["best_in_column"] = True
        else:
            report.best_in_column[config.key] = None
    return report
