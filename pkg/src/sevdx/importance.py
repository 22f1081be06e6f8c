"""Instance-level word importance for served predictions.

Linear heads score a token by the weight-times-feature product summed over
predicted labels. Forests get occlusion scores (probability drop when the
token's feature is zeroed) because impurity importances are global, not
instance-level.
"""

from __future__ import annotations

import re

import numpy as np

from . import features as ft
from . import textprep as tp
from .hierarchy import FlatModel, HierarchicalModel, Prediction, StageModel
from .learners import ForestModel, LogRegModel
from .ontology import NEGATIVE

_SURFACE_RE = re.compile(r"[A-Za-z0-9_']+")


def _token_feature_index(stage: StageModel, surface: str) -> int | None:
    stream = tp.prepare(surface, stage.prep)
    if not stream.tokens:
        return None
    tok = stream.tokens[0]
    # tokens folded into the unknown-word bucket carry no usable signal
    if tok not in stage.mask.retained:
        return None
    return stage.tfidf.vocabulary.get(tok)


def _stage_scores(stage: StageModel, text: str, labels: list[str]) -> dict[int, float]:
    """Per-feature-index contribution to the probabilities of ``labels``."""
    if stage.backend != "tfidf" or not labels:
        return {}
    stream = stage.mask.apply(tp.prepare(text, stage.prep))
    vec = ft.tfidf_transform(stage.tfidf, stream)
    if not vec.indices:
        return {}
    cols = [stage.label_names.index(l) for l in labels]
    clf = stage.classifier
    scores: dict[int, float] = {}
    if isinstance(clf, LogRegModel):
        for idx, val in zip(vec.indices, vec.values):
            scores[idx] = float(sum(clf.weights[c, idx] * val for c in cols))
    elif isinstance(clf, ForestModel):
        x = vec.to_dense()[None, :]
        base = clf.predict_proba(x)[0]
        for idx in vec.indices:
            occluded = x.copy()
            occluded[0, idx] = 0.0
            drop = base - clf.predict_proba(occluded)[0]
            scores[idx] = float(sum(drop[c] for c in cols))
    return scores


def word_importance(model: HierarchicalModel | FlatModel, text: str, prediction: Prediction | None = None) -> list[tuple[str, float]]:
    """Signed per-token scores for the tokens present in ``text``.

    Stage-2 branch heads drive the scores for predicted diagnoses; when no
    diagnosis was predicted the stage-1 head for the predicted severities is
    used instead, so Negative parts still get highlighting.
    """
    if isinstance(model, FlatModel):
        labels = sorted(model.predict_label_sets([text])[0])
        per_feature = _stage_scores(model.stage, text, labels)
        stages = [(model.stage, per_feature)]
    else:
        if prediction is None:
            prediction = model.predict(text)
        stages = []
        by_branch: dict[str, list[str]] = {}
        for name, _, sev in prediction.diagnoses:
            by_branch.setdefault(sev, []).append(name)
        for sev, names in by_branch.items():
            branch = model.branches.get(sev)
            if branch is not None:
                stages.append((branch, _stage_scores(branch, text, names)))
        if not stages and prediction.severities:
            sev_labels = [code for code, _ in prediction.severities]
            stages.append((model.stage1, _stage_scores(model.stage1, text, sev_labels)))

    scores: dict[str, float] = {}
    for surface in dict.fromkeys(_SURFACE_RE.findall(text)):
        total = 0.0
        for stage, per_feature in stages:
            idx = _token_feature_index(stage, surface)
            if idx is not None and idx in per_feature:
                total += per_feature[idx]
        if total != 0.0:
            scores[surface] = total
    return sorted(scores.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
