"""CART decision trees: Gini classification and variance-reduction
regression (the boosting base learner), with impurity-decrease tracking."""

from __future__ import annotations

import numpy as np


def _gini(pos: float, n: float) -> float:
    if n == 0:
        return 0.0
    p = pos / n
    return 2.0 * p * (1.0 - p)


def _best_split_gini(X, y, feat_idx, min_leaf):
    """(feature, threshold, decrease) maximizing Gini decrease, or None.

    Thresholds are midpoints between consecutive distinct values; ties
    resolve to the first feature scanned and the lowest threshold.
    """
    n = len(y)
    parent = _gini(float(np.sum(y)), n)
    best = None
    best_dec = 0.0
    for j in feat_idx:
        xj = X[:, j]
        order = np.argsort(xj, kind="stable")
        xs, ys = xj[order], y[order]
        distinct = np.flatnonzero(np.diff(xs) > 0) + 1  # left-group sizes
        if len(distinct) == 0:
            continue
        cum_pos = np.cumsum(ys)
        nl = distinct.astype(float)
        pos_l = cum_pos[distinct - 1].astype(float)
        nr = n - nl
        pos_r = float(cum_pos[-1]) - pos_l
        ok = (nl >= min_leaf) & (nr >= min_leaf)
        if not np.any(ok):
            continue
        pl, pr = pos_l[ok] / nl[ok], pos_r[ok] / nr[ok]
        child = (nl[ok] * 2 * pl * (1 - pl) + nr[ok] * 2 * pr * (1 - pr)) / n
        dec = parent - child
        k = int(np.argmax(dec))
        if dec[k] > best_dec + 1e-15:
            cut = distinct[np.flatnonzero(ok)[k]]
            thr = 0.5 * (xs[cut - 1] + xs[cut])
            best = (j, float(thr))
            best_dec = float(dec[k])
    return (best[0], best[1], best_dec) if best else None


def _best_split_var(X, g, feat_idx, min_leaf):
    """(feature, threshold, decrease) maximizing variance reduction."""
    n = len(g)
    parent = float(np.var(g))
    best = None
    best_dec = 0.0
    for j in feat_idx:
        xj = X[:, j]
        order = np.argsort(xj, kind="stable")
        xs, gs = xj[order], g[order]
        distinct = np.flatnonzero(np.diff(xs) > 0) + 1
        if len(distinct) == 0:
            continue
        cs = np.cumsum(gs)
        cs2 = np.cumsum(gs * gs)
        nl = distinct.astype(float)
        sl, sl2 = cs[distinct - 1], cs2[distinct - 1]
        nr = n - nl
        sr, sr2 = cs[-1] - sl, cs2[-1] - sl2
        ok = (nl >= min_leaf) & (nr >= min_leaf)
        if not np.any(ok):
            continue
        var_l = sl2[ok] / nl[ok] - (sl[ok] / nl[ok]) ** 2
        var_r = sr2[ok] / nr[ok] - (sr[ok] / nr[ok]) ** 2
        child = (nl[ok] * var_l + nr[ok] * var_r) / n
        dec = parent - child
        k = int(np.argmax(dec))
        if dec[k] > best_dec + 1e-15:
            cut = distinct[np.flatnonzero(ok)[k]]
            best = (j, float(0.5 * (xs[cut - 1] + xs[cut])))
            best_dec = float(dec[k])
    return (best[0], best[1], best_dec) if best else None


def _grow(X, y, depth, max_depth, min_leaf, n_root, importances, rng, n_sub,
          leaf_value, split_fn):
    n = len(y)
    leaf = {"leaf": leaf_value(y)}
    if depth >= max_depth or n < 2 * min_leaf:
        return leaf
    p = X.shape[1]
    if n_sub is not None and n_sub < p:
        feat_idx = np.sort(rng.choice(p, size=n_sub, replace=False))
    else:
        feat_idx = np.arange(p)
    found = split_fn(X, y, feat_idx, min_leaf)
    if found is None:
        return leaf
    j, thr, dec = found
    if importances is not None:
        importances[j] += (n / n_root) * dec
    mask = X[:, j] <= thr
    return {
        "feature": int(j),
        "threshold": thr,
        "left": _grow(X[mask], y[mask], depth + 1, max_depth, min_leaf, n_root,
                      importances, rng, n_sub, leaf_value, split_fn),
        "right": _grow(X[~mask], y[~mask], depth + 1, max_depth, min_leaf,
                       n_root, importances, rng, n_sub, leaf_value, split_fn),
    }


def grow_classification_tree(X, y, max_depth, min_leaf, rng=None, n_sub=None,
                             importances=None) -> dict:
    return _grow(X, y.astype(float), 0, max_depth, min_leaf, len(y),
                 importances, rng, n_sub,
                 leaf_value=lambda t: float(np.mean(t)),
                 split_fn=_best_split_gini)


def tree_apply(node: dict, X: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape[0])
    stack = [(node, np.arange(X.shape[0]))]
    while stack:
        nd, idx = stack.pop()
        if "leaf" in nd:
            out[idx] = nd["leaf"]
            continue
        mask = X[idx, nd["feature"]] <= nd["threshold"]
        stack.append((nd["left"], idx[mask]))
        stack.append((nd["right"], idx[~mask]))
    return out


def fit_cart(X, y, max_depth: int = 8, min_leaf: int = 5) -> dict:
    """Single Gini CART; leaves store the anxious-class fraction."""
    return {"tree": grow_classification_tree(X, y, max_depth, min_leaf)}


def predict_cart(params: dict, X: np.ndarray) -> np.ndarray:
    return tree_apply(params["tree"], X)
