"""Classifier registry, training dispatch, scoring, and model text I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import SchemaError

CLASSIFIER_IDS = ("C1", "C2", "C3", "C4", "C5", "DNN")

DEFAULT_HYPER = {
    "C1": {"l2": 1e-3, "max_iter": 5000, "grad_tol": 1e-6},
    "C2": {"n_trees": 100, "max_depth": 8, "min_leaf": 5},
    "C3": {"max_depth": 8, "min_leaf": 5},
    "C4": {"l2": 1e-3, "iters": 4000, "step": 0.5},
    "C5": {"n_trees": 100, "max_depth": 3, "min_leaf": 5, "shrinkage": 0.1},
    "DNN": {"epochs": 100, "batch_size": 32, "learning_rate": 1e-4},
}


@dataclass
class TrainedModel:
    classifier_id: str
    feature_names: list[str]
    seed: int
    params: dict[str, Any]
    threshold: float = 0.5  # score cut for the hard label (0.0 for margins)

    def check_schema(self, feature_names) -> None:
        if list(feature_names) != list(self.feature_names):
            raise SchemaError(
                f"{self.classifier_id}: feature schema differs from training schema")


def canonical_row_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Deterministic row order keyed to row content, not input position.

    Training on (X[order], y[order]) makes every model invariant to
    permutations of the caller's rows: full-batch sums run in a fixed
    order and seeded resampling indexes canonical identities.
    """
    keys = np.column_stack([X, y])
    return np.lexsort(keys.T[::-1])


def _validate(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise ValueError("X must be 2-D with one label per row")
    if np.any(np.isnan(X)):
        raise ValueError("missing values in training matrix")
    if len(np.unique(y)) < 2 or min(np.sum(y == 0), np.sum(y == 1)) < 2:
        raise ValueError("degenerate training labels")
    return X, y


def train(classifier_id: str, X, y, hyper: dict | None = None, seed: int = 0,
          feature_names: list[str] | None = None) -> TrainedModel:
    """Fit one classifier; reproducible from (inputs, hyper, seed)."""
    from . import ensemble, linear, mlp, tree

    if classifier_id not in CLASSIFIER_IDS:
        raise ValueError(f"unknown classifier {classifier_id!r}")
    X, y = _validate(X, y)
    cfg = dict(DEFAULT_HYPER[classifier_id])
    if hyper:
        cfg.update(hyper)
    order = canonical_row_order(X, y)
    Xc, yc = X[order], y[order]
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(X.shape[1])]

    if classifier_id == "C1":
        params = linear.fit_logistic(Xc, yc, **cfg)
        threshold = 0.5
    elif classifier_id == "C2":
        params = ensemble.fit_forest(Xc, yc, seed=seed, **cfg)
        threshold = 0.5
    elif classifier_id == "C3":
        params = tree.fit_cart(Xc, yc, **cfg)
        threshold = 0.5
    elif classifier_id == "C4":
        params = linear.fit_svm(Xc, yc, **cfg)
        threshold = 0.0
    elif classifier_id == "C5":
        params = ensemble.fit_boosting(Xc, yc, **cfg)
        threshold = 0.5
    else:
        spec = mlp.MlpSpec(epochs=cfg["epochs"], batch_size=cfg["batch_size"],
                           learning_rate=cfg["learning_rate"])
        return mlp.train_mlp(spec, Xc, yc, seed=seed, feature_names=feature_names)
    return TrainedModel(classifier_id, list(feature_names), seed, params, threshold)


def predict_score(model: TrainedModel, X, feature_names: list[str] | None = None) -> np.ndarray:
    """Anxious-leaning score per row: probability, or margin for C4."""
    from . import ensemble, linear, mlp, tree

    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if feature_names is not None:
        model.check_schema(feature_names)
    elif X.shape[1] != len(model.feature_names):
        raise SchemaError(f"{model.classifier_id}: expected "
                          f"{len(model.feature_names)} features, got {X.shape[1]}")
    if X.shape[0] == 0:
        return np.array([])
    cid = model.classifier_id
    if cid == "C1":
        return linear.predict_logistic(model.params, X)
    if cid == "C2":
        return ensemble.predict_forest(model.params, X)
    if cid == "C3":
        return tree.predict_cart(model.params, X)
    if cid == "C4":
        return linear.predict_svm(model.params, X)
    if cid == "C5":
        return ensemble.predict_boosting(model.params, X)
    return mlp.predict_mlp(model.params, X)


def predict_label(model: TrainedModel, X, feature_names=None) -> np.ndarray:
    return (predict_score(model, X, feature_names) >= model.threshold).astype(int)


def gini_importance(model: TrainedModel) -> dict[str, float]:
    """Mean impurity decrease per feature across forest trees, sum 1."""
    from . import ensemble

    if model.classifier_id != "C2":
        raise ValueError("Gini importance is defined for the random forest (C2)")
    raw = ensemble.forest_importances(model.params, len(model.feature_names))
    total = raw.sum()
    if total > 0:
        raw = raw / total
    return {name: float(v) for name, v in zip(model.feature_names, raw)}


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.tolist(), "dtype": str(obj.dtype)}
    if isinstance(obj, dict):
        return {k: _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _from_jsonable(obj):
    if isinstance(obj, dict):
        if "__array__" in obj:
            return np.array(obj["__array__"], dtype=obj["dtype"])
        return {k: _from_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_from_jsonable(v) for v in obj]
    return obj


def save_model(model: TrainedModel, path) -> None:
    """Write the model as a JSON text document (floats round-trip exactly)."""
    doc = {
        "classifier_id": model.classifier_id,
        "feature_names": model.feature_names,
        "seed": model.seed,
        "threshold": model.threshold,
        "params": _to_jsonable(model.params),
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)


def load_model(path) -> TrainedModel:
    with open(path) as fh:
        doc = json.load(fh)
    return TrainedModel(doc["classifier_id"], doc["feature_names"], doc["seed"],
                        _from_jsonable(doc["params"]), doc["threshold"])
