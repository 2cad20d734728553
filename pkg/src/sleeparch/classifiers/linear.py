"""Logistic regression (gradient descent) and linear SVM (Pegasos)."""

from __future__ import annotations

import numpy as np

from ..exceptions import InputError
from ..rng import SplitMix64


def _check_binary(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.int64)
    if not np.isin(y, (0, 1)).all():
        raise InputError("labels must be 0/1")
    if y.min() == y.max():
        raise InputError("training data must contain both classes")
    return y


def _sigmoid(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))


def logistic_objective(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> float:
    """Mean negative log-likelihood plus ``l2/2 * ||w||^2`` (intercept unpenalized)."""
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    nll = np.logaddexp(0.0, z) - y * z
    return float(nll.mean() + 0.5 * l2 * (w @ w))


def logistic_gradient(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, l2: float) -> tuple[np.ndarray, float]:
    r = _sigmoid(X @ w + b) - y
    n = X.shape[0]
    return X.T @ r / n + l2 * w, float(r.sum() / n)


class LogisticRegression:
    """L2-regularized logistic regression fitted by full-batch gradient descent.

    Starts from zero weights, so fitting is deterministic. Stops when the
    largest gradient component drops below `tol` or after `max_iter` steps.
    """

    name = "logreg"

    def __init__(self, l2: float = 1e-4, lr: float = 0.1, max_iter: int = 2000, tol: float = 1e-8):
        self.l2 = l2
        self.lr = lr
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y = _check_binary(y).astype(np.float64)
        w = np.zeros(X.shape[1])
        b = 0.0
        self.n_iter_ = 0
        for it in range(self.max_iter):
            gw, gb = logistic_gradient(w, b, X, y, self.l2)
            if max(np.max(np.abs(gw), initial=0.0), abs(gb)) < self.tol:
                break
            w = w - self.lr * gw
            b = b - self.lr * gb
            self.n_iter_ = it + 1
        self.coef_ = w
        self.intercept_ = b
        return self

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef_ + self.intercept_

    def predict_proba(self, X) -> np.ndarray:
        return _sigmoid(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0).astype(np.int64)


def svm_objective(w: np.ndarray, X: np.ndarray, y_pm: np.ndarray, lam: float) -> float:
    """``lam/2 ||w||^2 + mean(max(0, 1 - y <w, x>))`` with the bias folded into `w`."""
    Xa = np.column_stack([X, np.ones(X.shape[0])])
    hinge = np.maximum(0.0, 1.0 - y_pm * (Xa @ w))
    return float(0.5 * lam * (w @ w) + hinge.mean())


class LinearSVM:
    """Primal linear SVM trained by Pegasos stochastic subgradient steps.

    Step t uses learning rate ``1/(lam*t)`` on one example drawn from the
    seeded SplitMix64 stream, followed by projection onto the ball of radius
    ``1/sqrt(lam)``. A constant feature carries the bias.
    """

    name = "svm"

    def __init__(self, lam: float = 1e-3, iters: int = 10_000, seed: int = 0):
        if not lam > 0:
            raise InputError("SVM lambda must be > 0")
        self.lam = lam
        self.iters = iters
        self.seed = seed

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        y_pm = np.where(_check_binary(y) == 1, 1.0, -1.0)
        Xa = np.column_stack([X, np.ones(X.shape[0])])
        n, d = Xa.shape
        rng = SplitMix64(self.seed)
        w = np.zeros(d)
        radius = 1.0 / np.sqrt(self.lam)
        self.initial_objective_ = svm_objective(w, X, y_pm, self.lam)
        for t in range(1, self.iters + 1):
            i = rng.randbelow(n)
            eta = 1.0 / (self.lam * t)
            margin = y_pm[i] * (Xa[i] @ w)
            w *= 1.0 - eta * self.lam
            if margin < 1.0:
                w += eta * y_pm[i] * Xa[i]
            norm = np.sqrt(w @ w)
            if norm > radius:
                w *= radius / norm
        self.w_ = w
        self.final_objective_ = svm_objective(w, X, y_pm, self.lam)
        return self

    def decision_function(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return X @ self.w_[:-1] + self.w_[-1]

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) >= 0).astype(np.int64)
