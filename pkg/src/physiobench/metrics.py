"""Classification metrics with the anxious class as positive."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata

NAN = float("nan")


@dataclass(frozen=True)
class Confusion:
    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn


@dataclass(frozen=True)
class EvalTuple:
    """The reporting unit: AUROC plus per-class recall percentages."""

    auroc: float
    recall_anxious: float
    recall_non_anxious: float
    classifier_id: str

    def as_text(self) -> str:
        if math.isnan(self.auroc):
            a = "nan"
        else:
            a = f"{self.auroc:.2f}"
        return (f"({a}, {self.recall_anxious:.2f}, "
                f"{self.recall_non_anxious:.2f}, {self.classifier_id})")


def confusion(y_true, y_pred) -> Confusion:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    if y_true.shape != y_pred.shape:
        raise ValueError("label arrays differ in length")
    return Confusion(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
    )


def recalls(c: Confusion) -> tuple[float, float]:
    """(anxious recall %, non-anxious recall %); missing on empty classes."""
    r_anx = 100.0 * c.tp / (c.tp + c.fn) if (c.tp + c.fn) > 0 else NAN
    r_non = 100.0 * c.tn / (c.tn + c.fp) if (c.tn + c.fp) > 0 else NAN
    return r_anx, r_non


def accuracy(c: Confusion) -> float:
    return 100.0 * (c.tp + c.tn) / c.total if c.total else NAN


def auroc(scores, y_true) -> float:
    """Mann-Whitney AUROC with half credit for ties."""
    scores = np.asarray(scores, dtype=float)
    y_true = np.asarray(y_true, dtype=int)
    n_pos = int(np.sum(y_true == 1))
    n_neg = int(np.sum(y_true == 0))
    if n_pos == 0 or n_neg == 0:
        return NAN
    ranks = rankdata(scores)  # average ranks resolve ties at half credit
    r_pos = float(np.sum(ranks[y_true == 1]))
    return (r_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _t_sf_two_sided(t: float, df: float) -> float:
    if math.isnan(t) or df <= 0:
        return NAN
    return float(betainc(df / 2.0, 0.5, df / (df + t * t)))


def group_stats(values_a, values_b) -> tuple[float, float, float]:
    """Welch t-statistic, pooled-SD Cohen's d, and the two-sided p-value
    comparing the anxious (a) and non-anxious (b) groups."""
    a = np.asarray(values_a, dtype=float)
    b = np.asarray(values_b, dtype=float)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        return NAN, NAN, NAN
    va, vb = np.var(a, ddof=1), np.var(b, ddof=1)
    diff = float(np.mean(a) - np.mean(b))
    se2 = va / na + vb / nb
    if se2 > 0:
        t = diff / math.sqrt(se2)
        df = se2 ** 2 / ((va / na) ** 2 / (na - 1) + (vb / nb) ** 2 / (nb - 1))
        p = _t_sf_two_sided(t, df)
    else:
        t, p = (0.0, 1.0) if diff == 0 else (NAN, NAN)
    pooled = ((na - 1) * va + (nb - 1) * vb) / (na + nb - 2)
    d = diff / math.sqrt(pooled) if pooled > 0 else NAN
    return t, d, p
