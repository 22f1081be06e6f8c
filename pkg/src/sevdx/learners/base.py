"""Shared learner types: the label matrix and the classifier contract."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np


class LearnerError(ValueError):
    pass


@dataclass(frozen=True)
class LabelMatrix:
    bits: np.ndarray  # (n_samples, n_labels) bool
    label_names: tuple[str, ...]

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool)
        object.__setattr__(self, "bits", bits)
        if bits.ndim != 2:
            raise LearnerError("bits must be a 2-D matrix")
        if bits.shape[1] != len(self.label_names):
            raise LearnerError("label_names length must match the label dimension")
        if len(set(self.label_names)) != len(self.label_names):
            raise LearnerError("label names must be unique")

    @property
    def n_samples(self) -> int:
        return self.bits.shape[0]

    @property
    def n_labels(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def from_label_sets(cls, sets: list[set[str]], label_names: list[str]) -> "LabelMatrix":
        names = tuple(label_names)
        index = {n: i for i, n in enumerate(names)}
        bits = np.zeros((len(sets), len(names)), dtype=bool)
        for row, labels in enumerate(sets):
            for lab in labels:
                if lab not in index:
                    raise LearnerError(f"unknown label {lab!r}")
                bits[row, index[lab]] = True
        return cls(bits=bits, label_names=names)


@runtime_checkable
class ClassifierContract(Protocol):
    label_names: tuple[str, ...]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Per-label probabilities, shape (n_samples, n_labels), in [0, 1]."""
        ...

    def to_dict(self) -> dict: ...


def classifier_from_dict(d: dict):
    from .forest import ForestModel
    from .logreg import LogRegModel

    kinds = {"logreg": LogRegModel, "forest": ForestModel}
    kind = d.get("kind")
    if kind not in kinds:
        raise LearnerError(f"unknown classifier kind: {kind!r}")
    return kinds[kind].from_dict(d)


def check_features(X: np.ndarray, dim: int):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != dim:
        raise LearnerError(f"expected feature matrix of dim {dim}, got shape {X.shape}")
    return X
