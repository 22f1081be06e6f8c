"""One-vs-rest random forests with Gini-impurity splits.

Splits minimize the weighted child Gini over a random feature subset;
ties resolve to the lowest feature index, then the lowest threshold.
Per-tree RNGs derive from (master seed, label index, tree index), so training
output is independent of any parallelism in the caller.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .base import LabelMatrix, LearnerError, check_features


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 15
    max_depth: int | None = 12
    max_features: str | int = "sqrt"  # "sqrt", "all", or an explicit count
    bootstrap: bool = True
    seed: int = 0
    threshold: float = 0.5


@dataclass
class _Tree:
    feature: np.ndarray  # int32, -1 for leaves
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    prob: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            active = np.nonzero(self.feature[node] >= 0)[0]
            if active.size == 0:
                return self.prob[node]
            nd = node[active]
            go_left = X[active, self.feature[nd]] <= self.threshold[nd]
            node[active] = np.where(go_left, self.left[nd], self.right[nd])

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(v) for v in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "prob": [float(v) for v in self.prob],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "_Tree":
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int32),
            threshold=np.asarray(d["threshold"], dtype=float),
            left=np.asarray(d["left"], dtype=np.int32),
            right=np.asarray(d["right"], dtype=np.int32),
            prob=np.asarray(d["prob"], dtype=float),
        )


def _n_candidate_features(cfg: ForestConfig, dim: int) -> int:
    if cfg.max_features == "all":
        return dim
    if cfg.max_features == "sqrt":
        return max(1, int(np.sqrt(dim)))
    return max(1, min(int(cfg.max_features), dim))


def _best_split(Xcols: np.ndarray, y: np.ndarray, feat_ids: np.ndarray):
    """Lowest weighted child Gini; ties -> lowest feature, lowest threshold."""
    n = len(y)
    pos_total = y.sum()
    best = None
    for j_col, f in enumerate(feat_ids):
        x = Xcols[:, j_col]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y[order]
        boundary = np.nonzero(xs[1:] != xs[:-1])[0]
        if boundary.size == 0:
            continue
        cum_pos = np.cumsum(ys)
        nl = boundary + 1
        pl = cum_pos[boundary]
        nr = n - nl
        pr = pos_total - pl
        gl = 1.0 - (pl / nl) ** 2 - ((nl - pl) / nl) ** 2
        gr = 1.0 - (pr / nr) ** 2 - ((nr - pr) / nr) ** 2
        wg = (nl * gl + nr * gr) / n
        j = int(np.argmin(wg))
        if best is None or wg[j] < best[0]:
            thr = (xs[boundary[j]] + xs[boundary[j] + 1]) / 2.0
            best = (float(wg[j]), int(f), thr)
    return best


def _build_tree(X: np.ndarray, y: np.ndarray, cfg: ForestConfig, rng: np.random.Generator) -> _Tree:
    n, dim = X.shape
    k = _n_candidate_features(cfg, dim)
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    prob: list[float] = []

    def grow(idx: np.ndarray, depth: int) -> int:
        node = len(feature)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        yi = y[idx]
        p = float(yi.mean())
        prob.append(p)
        if p == 0.0 or p == 1.0 or len(idx) < 2:
            return node
        if cfg.max_depth is not None and depth >= cfg.max_depth:
            return node
        feat_ids = np.sort(rng.choice(dim, size=k, replace=False))
        split = _best_split(X[np.ix_(idx, feat_ids)], yi, feat_ids)
        if split is None:
            return node
        _, f, thr = split
        go_left = X[idx, f] <= thr
        if not go_left.any() or go_left.all():
            return node
        feature[node] = f
        threshold[node] = thr
        left[node] = grow(idx[go_left], depth + 1)
        right[node] = grow(idx[~go_left], depth + 1)
        return node

    grow(np.arange(n), 0)
    return _Tree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=float),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        prob=np.asarray(prob, dtype=float),
    )


@dataclass
class ForestModel:
    label_names: tuple[str, ...]
    forests: list[list[_Tree]]  # one list of trees per label
    config: ForestConfig
    dim: int
    warnings: tuple[str, ...] = ()

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = check_features(X, self.dim)
        out = np.zeros((X.shape[0], len(self.label_names)))
        for i, trees in enumerate(self.forests):
            out[:, i] = np.mean([t.predict(X) for t in trees], axis=0)
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "forest",
            "label_names": list(self.label_names),
            "dim": self.dim,
            "config": {
                "n_trees": self.config.n_trees,
                "max_depth": self.config.max_depth,
                "max_features": self.config.max_features,
                "bootstrap": self.config.bootstrap,
                "seed": self.config.seed,
                "threshold": self.config.threshold,
            },
            "forests": [[t.to_dict() for t in trees] for trees in self.forests],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(
            label_names=tuple(d["label_names"]),
            forests=[[_Tree.from_dict(t) for t in trees] for trees in d["forests"]],
            config=ForestConfig(**d["config"]),
            dim=int(d["dim"]),
            warnings=tuple(d.get("warnings", ())),
        )


def forest_fit(X: np.ndarray, Y: LabelMatrix, cfg: ForestConfig = ForestConfig()) -> ForestModel:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] != Y.n_samples:
        raise LearnerError("feature/label row mismatch")
    if Y.n_samples < 2:
        raise LearnerError("need at least 2 training rows")
    n, dim = X.shape
    forests: list[list[_Tree]] = []
    notes: list[str] = []
    for li, name in enumerate(Y.label_names):
        y = Y.bits[:, li].astype(float)
        n_pos = int(y.sum())
        if n_pos == 0 or n_pos == n:
            notes.append(
                f"label {name!r} has no {'positive' if n_pos == 0 else 'negative'} rows; forest is a constant predictor"
            )
        trees = []
        for ti in range(cfg.n_trees):
            rng = np.random.default_rng([cfg.seed, li, ti])
            idx = rng.integers(0, n, n) if cfg.bootstrap else np.arange(n)
            trees.append(_build_tree(X[idx], y[idx], cfg, rng))
        forests.append(trees)
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    return ForestModel(
        label_names=Y.label_names, forests=forests, config=cfg, dim=dim, warnings=tuple(notes)
    )
