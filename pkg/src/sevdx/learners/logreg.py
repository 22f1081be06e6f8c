"""One-vs-rest logistic regression trained by full-batch gradient descent.

The per-label loss is a class-weighted binary cross-entropy with an L2
penalty; the optimizer is plain gradient descent with step-halving whenever a
step would increase the loss, which keeps the accepted loss sequence
non-increasing.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .base import LabelMatrix, LearnerError, check_features


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    l2_lambda: float = 1e-4
    max_epochs: int = 500
    tol: float = 1e-6
    class_weighting: bool = True
    threshold: float = 0.5


def _log_sigmoid(z: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -z)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss_and_grad(
    w: np.ndarray,
    b: float,
    X: np.ndarray,
    y: np.ndarray,
    alpha: float = 1.0,
    l2_lambda: float = 0.0,
) -> tuple[float, np.ndarray, float]:
    """Weighted BCE loss with L2 penalty and its analytic gradient.

    L = -(1/n) sum[ alpha*y*log(sigma) + (1-y)*log(1-sigma) ] + lambda*||w||^2
    """
    n = X.shape[0]
    z = X @ w + b
    y = y.astype(float)
    loss = -(alpha * y * _log_sigmoid(z) + (1.0 - y) * _log_sigmoid(-z)).sum() / n
    loss += l2_lambda * float(w @ w)
    s = _sigmoid(z)
    dz = (s * (alpha * y + 1.0 - y) - alpha * y) / n
    grad_w = X.T @ dz + 2.0 * l2_lambda * w
    grad_b = float(dz.sum())
    if not np.isfinite(loss):
        raise LearnerError("non-finite training loss")
    return float(loss), grad_w, grad_b


@dataclass
class LogRegModel:
    label_names: tuple[str, ...]
    weights: np.ndarray  # (n_labels, dim)
    biases: np.ndarray  # (n_labels,)
    config: LogRegConfig
    constant: dict[str, float]  # label -> prior, for degenerate labels
    thresholds: np.ndarray  # (n_labels,)
    warnings: tuple[str, ...] = ()

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = check_features(X, self.dim)
        probs = _sigmoid(X @ self.weights.T + self.biases)
        for i, name in enumerate(self.label_names):
            if name in self.constant:
                probs[:, i] = self.constant[name]
        return probs

    def to_dict(self) -> dict:
        return {
            "kind": "logreg",
            "label_names": list(self.label_names),
            "weights": [[float(v) for v in row] for row in self.weights],
            "biases": [float(v) for v in self.biases],
            "config": {
                "learning_rate": self.config.learning_rate,
                "l2_lambda": self.config.l2_lambda,
                "max_epochs": self.config.max_epochs,
                "tol": self.config.tol,
                "class_weighting": self.config.class_weighting,
                "threshold": self.config.threshold,
            },
            "constant": dict(self.constant),
            "thresholds": [float(v) for v in self.thresholds],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LogRegModel":
        return cls(
            label_names=tuple(d["label_names"]),
            weights=np.asarray(d["weights"], dtype=float),
            biases=np.asarray(d["biases"], dtype=float),
            config=LogRegConfig(**d["config"]),
            constant={k: float(v) for k, v in d["constant"].items()},
            thresholds=np.asarray(d["thresholds"], dtype=float),
            warnings=tuple(d.get("warnings", ())),
        )


def _fit_one(X: np.ndarray, y: np.ndarray, cfg: LogRegConfig) -> tuple[np.ndarray, float]:
    dim = X.shape[1]
    w = np.zeros(dim)
    b = 0.0
    n_pos = int(y.sum())
    alpha = (len(y) - n_pos) / n_pos if cfg.class_weighting else 1.0
    lr = cfg.learning_rate
    loss, gw, gb = bce_loss_and_grad(w, b, X, y, alpha, cfg.l2_lambda)
    for _ in range(cfg.max_epochs):
        while True:
            w_new = w - lr * gw
            b_new = b - lr * gb
            new_loss, gw_new, gb_new = bce_loss_and_grad(w_new, b_new, X, y, alpha, cfg.l2_lambda)
            if new_loss <= loss or lr < 1e-12:
                break
            lr /= 2.0
        if lr < 1e-12:
            break
        delta = loss - new_loss
        w, b, loss, gw, gb = w_new, b_new, new_loss, gw_new, gb_new
        if abs(delta) < cfg.tol:
            break
    return w, b


def logreg_fit(X: np.ndarray, Y: LabelMatrix, cfg: LogRegConfig = LogRegConfig()) -> LogRegModel:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != Y.n_samples:
        raise LearnerError("feature/label row mismatch")
    if Y.n_samples < 2:
        raise LearnerError("need at least 2 training rows")
    n, dim = X.shape
    weights = np.zeros((Y.n_labels, dim))
    biases = np.zeros(Y.n_labels)
    constant: dict[str, float] = {}
    notes: list[str] = []
    for i, name in enumerate(Y.label_names):
        y = Y.bits[:, i]
        n_pos = int(y.sum())
        if n_pos == 0 or n_pos == n:
            prior = n_pos / n
            constant[name] = prior
            notes.append(f"label {name!r} has no {'positive' if n_pos == 0 else 'negative'} rows; constant predictor at prior {prior:.3f}")
            continue
        weights[i], biases[i] = _fit_one(X, y.astype(float), cfg)
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return LogRegModel(
        label_names=Y.label_names,
        weights=weights,
        biases=biases,
        config=cfg,
        constant=constant,
        thresholds=np.full(Y.n_labels, cfg.threshold),
        warnings=tuple(notes),
    )
