"""Bootstrap random forest and logistic-loss gradient boosting."""

from __future__ import annotations

import numpy as np

from .tree import grow_classification_tree, tree_apply


def fit_forest(X, y, n_trees: int = 100, max_depth: int = 8, min_leaf: int = 5,
               seed: int = 0) -> dict:
    """Classification trees on bootstrap samples with sqrt(p) features
    considered per split; per-tree impurity decreases are kept for the
    Gini importances."""
    n, p = X.shape
    n_sub = max(int(round(np.sqrt(p))), 1)
    seqs = np.random.SeedSequence(seed).spawn(n_trees)
    trees = []
    importances = []
    for seq in seqs:
        rng = np.random.default_rng(seq)
        idx = rng.integers(0, n, size=n)
        imp = np.zeros(p)
        trees.append(grow_classification_tree(X[idx], y[idx], max_depth,
                                              min_leaf, rng=rng, n_sub=n_sub,
                                              importances=imp))
        importances.append(imp)
    return {"trees": trees, "importances": np.array(importances)}


def predict_forest(params: dict, X: np.ndarray) -> np.ndarray:
    votes = np.zeros(X.shape[0])
    for tree in params["trees"]:
        votes += tree_apply(tree, X)
    return votes / len(params["trees"])


def forest_importances(params: dict, n_features: int) -> np.ndarray:
    imp = np.asarray(params["importances"], dtype=float)
    if imp.shape[1] != n_features:
        raise ValueError("importance width does not match feature count")
    return imp.mean(axis=0)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_boosting(X, y, n_trees: int = 100, max_depth: int = 3, min_leaf: int = 5,
                 shrinkage: float = 0.1) -> dict:
    """Gradient boosting on the logistic loss.

    Each stage fits a variance-reduction regression tree to the residual
    y - sigmoid(F) with Newton leaf values sum(r)/sum(p(1-p)).
    """
    y = y.astype(float)
    prior = float(np.clip(np.mean(y), 1e-6, 1 - 1e-6))
    f0 = float(np.log(prior / (1 - prior)))
    F = np.full(len(y), f0)
    trees = []
    for _ in range(n_trees):
        p = _sigmoid(F)
        resid = y - p
        tree = _grow_newton_tree(X, resid, p, max_depth, min_leaf)
        F = F + shrinkage * tree_apply(tree, X)
        trees.append(tree)
    return {"f0": f0, "shrinkage": shrinkage, "trees": trees}


def _grow_newton_tree(X, resid, p, max_depth, min_leaf):
    """Regression tree on the residuals whose leaves take the Newton step
    sum(resid) / sum(p(1-p)) over their member rows."""
    from .tree import _best_split_var

    def leaf(rows):
        num = float(np.sum(resid[rows]))
        den = float(np.sum(p[rows] * (1 - p[rows])))
        return {"leaf": num / den if den > 1e-12 else 0.0}

    def grow(rows, depth):
        if depth >= max_depth or len(rows) < 2 * min_leaf:
            return leaf(rows)
        found = _best_split_var(X[rows], resid[rows], np.arange(X.shape[1]),
                                min_leaf)
        if found is None:
            return leaf(rows)
        j, thr, _ = found
        mask = X[rows, j] <= thr
        return {"feature": int(j), "threshold": thr,
                "left": grow(rows[mask], depth + 1),
                "right": grow(rows[~mask], depth + 1)}

    return grow(np.arange(X.shape[0]), 0)


def predict_boosting(params: dict, X: np.ndarray) -> np.ndarray:
    F = np.full(X.shape[0], params["f0"])
    for tree in params["trees"]:
        F += params["shrinkage"] * tree_apply(tree, X)
    return _sigmoid(F)
