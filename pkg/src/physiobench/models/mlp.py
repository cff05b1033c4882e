"""Dense feed-forward network (ReLU hidden, sigmoid output) trained with
Adam on binary cross-entropy, plus the fine-tuning protocol."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .base import TrainedModel, canonical_row_order

HIDDEN_SIZES = (256, 128, 64, 32, 16)


@dataclass
class MlpSpec:
    hidden_sizes: tuple = HIDDEN_SIZES
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 100
    batch_size: int = 32


def init_params(n_features: int, spec: MlpSpec, rng) -> dict:
    """He-initialized weight/bias list; layer l maps sizes[l] -> sizes[l+1]."""
    sizes = [n_features, *spec.hidden_sizes, 1]
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return {"weights": weights, "biases": biases}


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def forward(params: dict, X: np.ndarray):
    """Returns (probabilities, per-layer activations for backprop)."""
    acts = [X]
    a = X
    n_layers = len(params["weights"])
    for l, (W, b) in enumerate(zip(params["weights"], params["biases"])):
        z = a @ W + b
        a = _sigmoid(z) if l == n_layers - 1 else np.maximum(z, 0.0)
        acts.append(a)
    return a[:, 0], acts


def predict_mlp(params: dict, X: np.ndarray) -> np.ndarray:
    return forward(params, X)[0]


def loss_and_grads(params: dict, X: np.ndarray, y: np.ndarray):
    """Mean binary cross-entropy and exact gradients for every layer."""
    n = len(y)
    prob, acts = forward(params, X)
    p = np.clip(prob, 1e-12, 1 - 1e-12)
    loss = float(-np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
    grads_w = [None] * len(params["weights"])
    grads_b = [None] * len(params["biases"])
    # output delta of sigmoid+BCE is (p - y)/n
    delta = ((prob - y) / n)[:, None]
    for l in range(len(params["weights"]) - 1, -1, -1):
        grads_w[l] = acts[l].T @ delta
        grads_b[l] = delta.sum(axis=0)
        if l > 0:
            delta = (delta @ params["weights"][l].T) * (acts[l] > 0)
    return loss, grads_w, grads_b


class _Adam:
    def __init__(self, params: dict, spec: MlpSpec):
        self.spec = spec
        self.t = 0
        self.m_w = [np.zeros_like(w) for w in params["weights"]]
        self.v_w = [np.zeros_like(w) for w in params["weights"]]
        self.m_b = [np.zeros_like(b) for b in params["biases"]]
        self.v_b = [np.zeros_like(b) for b in params["biases"]]

    def step(self, params, grads_w, grads_b):
        s = self.spec
        self.t += 1
        bc1 = 1 - s.beta1 ** self.t
        bc2 = 1 - s.beta2 ** self.t
        for l in range(len(params["weights"])):
            for m, v, g, target in ((self.m_w[l], self.v_w[l], grads_w[l],
                                     params["weights"][l]),
                                    (self.m_b[l], self.v_b[l], grads_b[l],
                                     params["biases"][l])):
                m *= s.beta1
                m += (1 - s.beta1) * g
                v *= s.beta2
                v += (1 - s.beta2) * g * g
                target -= s.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + s.eps)


def _run_epochs(params, X, y, spec: MlpSpec, epochs, rng, adam=None,
                X_val=None, y_val=None):
    """Adam minibatch training; tracks the best validation epoch if given."""
    if adam is None:
        adam = _Adam(params, spec)
    history = []
    best = (np.inf, None)
    for _ in range(epochs):
        order = rng.permutation(len(y))
        for start in range(0, len(y), spec.batch_size):
            batch = order[start:start + spec.batch_size]
            _, gw, gb = loss_and_grads(params, X[batch], y[batch])
            adam.step(params, gw, gb)
        loss, _, _ = loss_and_grads(params, X, y)
        history.append(loss)
        if X_val is not None:
            vloss, _, _ = loss_and_grads(params, X_val, y_val)
            if vloss < best[0]:
                best = (vloss, _copy_params(params))
    return history, best


def _copy_params(params):
    return {"weights": [w.copy() for w in params["weights"]],
            "biases": [b.copy() for b in params["biases"]]}


def train_mlp(spec: MlpSpec, X, y, seed: int = 0,
              feature_names: list[str] | None = None) -> TrainedModel:
    """Train from He initialization; deterministic for a given seed."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(y)) < 2 or min(np.sum(y == 0), np.sum(y == 1)) < 2:
        raise ValueError("degenerate training labels")
    order = canonical_row_order(X, y.astype(int))
    X, y = X[order], y[order]
    rng = np.random.default_rng(seed)
    params = init_params(X.shape[1], spec, rng)
    history, _ = _run_epochs(params, X, y, spec, spec.epochs, rng)
    if feature_names is None:
        feature_names = [f"x{i}" for i in range(X.shape[1])]
    params["history"] = history
    params["spec"] = {"hidden_sizes": list(spec.hidden_sizes),
                      "learning_rate": spec.learning_rate,
                      "epochs": spec.epochs, "batch_size": spec.batch_size}
    return TrainedModel("DNN", list(feature_names), seed, params, 0.5)


def finetune_mlp(model: TrainedModel, X, y, seed: int = 42,
                 epochs: int = 100):
    """Continue Adam training on a seeded 70/15/15 split.

    Weights restart from the given model; the epoch with the lowest
    validation loss wins; returns (fine-tuned model, held-out EvalTuple).
    """
    from ..metrics import EvalTuple, confusion, auroc, recalls

    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    n_train = int(round(0.70 * n))
    n_val = int(round(0.15 * n))
    tr, va, te = (perm[:n_train], perm[n_train:n_train + n_val],
                  perm[n_train + n_val:])
    if min(len(tr), len(va), len(te)) < 2:
        raise ValueError("split too small")
    sd = model.params["spec"]
    spec = MlpSpec(hidden_sizes=tuple(sd["hidden_sizes"]),
                   learning_rate=sd["learning_rate"],
                   epochs=epochs, batch_size=sd["batch_size"])
    params = _copy_params(model.params)
    _, best = _run_epochs(params, X[tr], y[tr], spec, epochs, rng,
                          X_val=X[va], y_val=y[va])
    if best[1] is not None:
        params = best[1]
    params["history"] = list(model.params.get("history", []))
    params["spec"] = dict(sd)
    tuned = TrainedModel("DNN", list(model.feature_names), seed, params, 0.5)
    scores = predict_mlp(params, X[te])
    y_te = y[te].astype(int)
    conf = confusion(y_te, (scores >= 0.5).astype(int))
    r_anx, r_non = recalls(conf)
    return tuned, EvalTuple(auroc(scores, y_te), r_anx, r_non, "DNN")
