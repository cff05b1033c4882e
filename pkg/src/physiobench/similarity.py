"""Optimal-transport dataset distance with an entropic Sinkhorn solver.

Ground cost between rows of two labeled datasets is squared Euclidean
feature distance plus the squared 2-Wasserstein (Bures) distance between
the per-dataset Gaussian fits of the two rows' class conditionals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.special import logsumexp

from .pipeline import FeatureMatrix

DEFAULT_EPSILON = 1e-2
DEFAULT_MAX_POINTS = 500
SINKHORN_TOL = 1e-9
SINKHORN_MAX_ITER = 10000


@dataclass(frozen=True)
class TransportProblem:
    cost: np.ndarray          # n x m, non-negative
    source_weights: np.ndarray
    target_weights: np.ndarray
    epsilon: float

    def __post_init__(self):
        cost = np.asarray(self.cost, dtype=float)
        a = np.asarray(self.source_weights, dtype=float)
        b = np.asarray(self.target_weights, dtype=float)
        if cost.shape != (len(a), len(b)):
            raise ValueError("cost shape must match weight lengths")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise ValueError("cost must be finite and non-negative")
        for w in (a, b):
            if abs(w.sum() - 1.0) > 1e-9 or np.any(w < 0):
                raise ValueError("weights must lie on the simplex")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "source_weights", a)
        object.__setattr__(self, "target_weights", b)


@dataclass(frozen=True)
class OtddResult:
    distance: float
    plan: np.ndarray
    converged: bool
    iterations: int


def sinkhorn(problem: TransportProblem) -> OtddResult:
    """Log-domain Sinkhorn scaling until marginal violation < 1e-9."""
    if problem.epsilon <= 0:
        raise ValueError("entropic regularization must be positive")
    C = problem.cost
    eps = problem.epsilon
    log_a = np.log(problem.source_weights)
    log_b = np.log(problem.target_weights)
    f = np.zeros(len(log_a))
    g = np.zeros(len(log_b))
    converged = False
    it = 0
    for it in range(1, SINKHORN_MAX_ITER + 1):
        f = eps * (log_a - logsumexp((g[None, :] - C) / eps, axis=1))
        g = eps * (log_b - logsumexp((f[:, None] - C) / eps, axis=0))
        log_plan = (f[:, None] + g[None, :] - C) / eps
        plan = np.exp(log_plan)
        err = max(np.abs(plan.sum(axis=1) - problem.source_weights).max(),
                  np.abs(plan.sum(axis=0) - problem.target_weights).max())
        if err < SINKHORN_TOL:
            converged = True
            break
    plan = np.exp((f[:, None] + g[None, :] - C) / eps)
    return OtddResult(float(np.sum(plan * C)), plan, converged, it)


def exact_ot_small(problem: TransportProblem) -> OtddResult:
    """Exact OT by linear programming; intended for n*m <= 64 oracles."""
    C = problem.cost
    n, m = C.shape
    if n * m > 64:
        raise ValueError("exact solver is limited to n*m <= 64")
    A_eq = np.zeros((n + m, n * m))
    for i in range(n):
        A_eq[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A_eq[n + j, j::m] = 1.0
    b_eq = np.concatenate([problem.source_weights, problem.target_weights])
    res = linprog(C.ravel(), A_eq=A_eq[:-1], b_eq=b_eq[:-1],
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"exact OT solve failed: {res.message}")
    plan = res.x.reshape(n, m)
    return OtddResult(float(np.sum(plan * C)), plan, True, 0)


def _gaussian_fit(X: np.ndarray):
    mu = X.mean(axis=0)
    if X.shape[0] < 2:
        cov = np.zeros((X.shape[1], X.shape[1]))
    else:
        cov = np.cov(X, rowvar=False, ddof=1)
        cov = np.atleast_2d(cov)
    return mu, cov


def _psd_sqrt(M: np.ndarray) -> np.ndarray:
    M = (M + M.T) / 2.0
    vals, vecs = np.linalg.eigh(M)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def bures_w2_squared(mu1, cov1, mu2, cov2) -> float:
    """Squared 2-Wasserstein distance between two Gaussians."""
    diff = float(np.sum((mu1 - mu2) ** 2))
    s1 = _psd_sqrt(cov1)
    cross = _psd_sqrt(s1 @ cov2 @ s1)
    bures = float(np.trace(cov1) + np.trace(cov2) - 2.0 * np.trace(cross))
    return diff + max(bures, 0.0)


def _subsample(values, labels, max_points, rng):
    n = len(labels)
    if n <= max_points:
        return values, labels
    idx = np.sort(rng.choice(n, size=max_points, replace=False))
    return values[idx], labels[idx]


def otdd(dataset_a: FeatureMatrix, dataset_b: FeatureMatrix,
         epsilon: float = DEFAULT_EPSILON, max_points: int = DEFAULT_MAX_POINTS,
         seed: int = 0, solver: str = "sinkhorn") -> float:
    """Label-aware optimal-transport distance between two datasets.

    Features are z-scored jointly; class conditionals are fit per dataset.
    A class present in one dataset but absent from the other is an error.
    """
    if dataset_a.feature_names != dataset_b.feature_names:
        raise ValueError("datasets must share the projected feature schema")
    classes_a = set(np.unique(dataset_a.labels))
    classes_b = set(np.unique(dataset_b.labels))
    for cls in sorted(classes_a ^ classes_b):
        name = "Anxious" if cls == 1 else "NonAnxious"
        raise ValueError(f"class {name} absent from one dataset; "
                         "label distance undefined")

    rng = np.random.default_rng(seed)
    Xa, ya = _subsample(dataset_a.values, dataset_a.labels, max_points, rng)
    Xb, yb = _subsample(dataset_b.values, dataset_b.labels, max_points, rng)

    pooled = np.vstack([Xa, Xb])
    mean = pooled.mean(axis=0)
    sd = pooled.std(axis=0)
    sd[sd == 0] = 1.0
    Xa = (Xa - mean) / sd
    Xb = (Xb - mean) / sd

    label_dist = {}
    for ca in np.unique(ya):
        mu_a, cov_a = _gaussian_fit(Xa[ya == ca])
        for cb in np.unique(yb):
            mu_b, cov_b = _gaussian_fit(Xb[yb == cb])
            label_dist[(ca, cb)] = bures_w2_squared(mu_a, cov_a, mu_b, cov_b)

    feat = ((Xa ** 2).sum(axis=1)[:, None] + (Xb ** 2).sum(axis=1)[None, :]
            - 2.0 * Xa @ Xb.T)
    feat = np.clip(feat, 0.0, None)
    lab = np.empty_like(feat)
    for (ca, cb), d in label_dist.items():
        lab[np.ix_(ya == ca, yb == cb)] = d
    cost = feat + lab

    a = np.full(len(Xa), 1.0 / len(Xa))
    b = np.full(len(Xb), 1.0 / len(Xb))
    problem = TransportProblem(cost, a, b, epsilon)
    if solver == "exact":
        return exact_ot_small(problem).distance
    if solver != "sinkhorn":
        raise ValueError(f"unknown solver {solver!r}")
    return sinkhorn(problem).distance
