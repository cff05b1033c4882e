"""Logistic regression (full-batch gradient descent) and linear SVM
(hinge subgradient descent). Both expect standardized features."""

from __future__ import annotations

import numpy as np


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(X: np.ndarray, y: np.ndarray, l2: float = 1e-3,
                 max_iter: int = 5000, grad_tol: float = 1e-6) -> dict:
    """L2-regularized logistic regression by full-batch gradient descent.

    Runs to gradient norm <= grad_tol or max_iter steps with a fixed
    1/L step from the logistic-Hessian Lipschitz bound.
    """
    n, p = X.shape
    w = np.zeros(p)
    b = 0.0
    cov = X.T @ X / n
    lip = 0.25 * float(np.linalg.eigvalsh(cov)[-1]) + 0.25 + l2
    step = 1.0 / lip
    for _ in range(max_iter):
        z = X @ w + b
        err = _sigmoid(z) - y
        gw = X.T @ err / n + l2 * w
        gb = float(np.mean(err))
        gnorm = float(np.sqrt(np.sum(gw * gw) + gb * gb))
        if gnorm <= grad_tol:
            break
        w -= step * gw
        b -= step * gb
    return {"w": w, "b": b}


def predict_logistic(params: dict, X: np.ndarray) -> np.ndarray:
    return _sigmoid(X @ params["w"] + params["b"])


def fit_svm(X: np.ndarray, y: np.ndarray, l2: float = 1e-3,
            iters: int = 4000, step: float = 0.5) -> dict:
    """Linear soft-margin SVM: hinge + L2 via full-batch subgradient descent.

    Deterministic (starts at zero, fixed 1/sqrt(t) schedule); the score is
    the unscaled margin.
    """
    n, p = X.shape
    ypm = np.where(y == 1, 1.0, -1.0)
    w = np.zeros(p)
    b = 0.0
    for t in range(1, iters + 1):
        margins = ypm * (X @ w + b)
        active = margins < 1.0
        gw = l2 * w - (ypm[active] @ X[active]) / n
        gb = -float(np.sum(ypm[active])) / n
        eta = step / np.sqrt(t)
        w -= eta * gw
        b -= eta * gb
    return {"w": w, "b": b}


def predict_svm(params: dict, X: np.ndarray) -> np.ndarray:
    return X @ params["w"] + params["b"]
