"""Two-level severity/diagnosis pipeline plus a flat single-stage baseline.

Stage 1 predicts severity categories with independent thresholds (a part can
carry several severities at once). Stage 2 routes the part to one branch
discriminator per predicted severity; each branch only knows the diagnosis
labels owned by its severity, and Negative has no branch. The flat baseline
trains one classifier over all diagnosis labels plus Negative and never
consults the ontology at inference.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import features as ft
from . import textprep as tp
from .learners import (
    ForestConfig,
    ForestModel,
    LabelMatrix,
    LearnerError,
    LogRegConfig,
    LogRegModel,
    classifier_from_dict,
    forest_fit,
    logreg_fit,
)
from .ontology import NEGATIVE, Ontology


class HierarchyError(ValueError):
    pass


@dataclass(frozen=True)
class TrainSettings:
    prep: tp.PrepConfig = tp.PrepConfig()
    classifier: str = "forest"  # "forest" or "logreg"
    forest: ForestConfig = ForestConfig()
    logreg: LogRegConfig = LogRegConfig()
    seed: int = 0
    severity_threshold: float = 0.5
    severity_threshold_overrides: dict = field(default_factory=dict)
    branch_threshold: float = 0.5
    stage1_backend: str = "tfidf"  # "tfidf" or "embed"
    embed_cfg: ft.EmbedProviderConfig | None = None

    def __post_init__(self):
        if self.classifier not in ("forest", "logreg"):
            raise HierarchyError(f"unknown classifier {self.classifier!r}")
        if self.stage1_backend not in ("tfidf", "embed"):
            raise HierarchyError(f"unknown backend {self.stage1_backend!r}")
        if self.stage1_backend == "embed" and self.embed_cfg is None:
            raise HierarchyError("embed backend requires embed_cfg")


@dataclass(frozen=True)
class Prediction:
    part_ref: str
    severities: tuple[tuple[str, float], ...]
    diagnoses: tuple[tuple[str, float, str], ...]
    no_prediction: bool

    def severity_codes(self) -> set[str]:
        return {code for code, _ in self.severities}

    def diagnosis_names(self) -> set[str]:
        return {name for name, _, _ in self.diagnoses}


@dataclass
class StageModel:
    """One feature backend + classifier + thresholds over a fixed label space."""

    backend: str  # "tfidf" or "embed"
    label_names: tuple[str, ...]
    classifier: LogRegModel | ForestModel
    thresholds: dict[str, float]
    prep: tp.PrepConfig
    mask: tp.VocabMask | None = None
    tfidf: ft.TfidfModel | None = None
    embed_cfg: ft.EmbedProviderConfig | None = None

    def featurize(self, texts: list[str]) -> np.ndarray:
        if self.backend == "tfidf":
            streams = [self.mask.apply(tp.prepare(t, self.prep)) for t in texts]
            return ft.to_matrix(ft.tfidf_transform_many(self.tfidf, streams))
        return ft.to_matrix(ft.embed(self.embed_cfg, texts))

    def predict_proba_texts(self, texts: list[str]) -> np.ndarray:
        return self.classifier.predict_proba(self.featurize(texts))

    def to_dict(self) -> dict:
        d = {
            "backend": self.backend,
            "label_names": list(self.label_names),
            "classifier": self.classifier.to_dict(),
            "thresholds": dict(self.thresholds),
            "prep": self.prep.to_dict(),
        }
        if self.backend == "tfidf":
            d["mask"] = self.mask.to_dict()
            d["tfidf"] = self.tfidf.to_dict()
        else:
            d["embed_cfg"] = {
                "endpoint": self.embed_cfg.endpoint,
                "dim": self.embed_cfg.dim,
                "timeout": self.embed_cfg.timeout,
                "batch_size": self.embed_cfg.batch_size,
                "finetune_doc": self.embed_cfg.finetune_doc,
            }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StageModel":
        backend = d["backend"]
        return cls(
            backend=backend,
            label_names=tuple(d["label_names"]),
            classifier=classifier_from_dict(d["classifier"]),
            thresholds=dict(d["thresholds"]),
            prep=tp.PrepConfig.from_dict(d["prep"]),
            mask=tp.VocabMask.from_dict(d["mask"]) if backend == "tfidf" else None,
            tfidf=ft.TfidfModel.from_dict(d["tfidf"]) if backend == "tfidf" else None,
            embed_cfg=ft.EmbedProviderConfig(**d["embed_cfg"]) if backend == "embed" else None,
        )


def derive_gold_severities(gold_diagnoses: set[str], ont: Ontology) -> set[str]:
    """Severity gold labels follow from diagnosis gold labels; no labels = Negative."""
    if not gold_diagnoses:
        return {NEGATIVE}
    return {ont.severity_of(d) for d in gold_diagnoses}


def _derive_seed(master: int, slot: int) -> int:
    return int(np.random.SeedSequence([master, slot]).generate_state(1)[0])


def _fit_classifier(X: np.ndarray, Y: LabelMatrix, cfg: TrainSettings, slot: int):
    if cfg.classifier == "forest":
        fcfg = replace(cfg.forest, seed=_derive_seed(cfg.seed, slot))
        return forest_fit(X, Y, fcfg)
    return logreg_fit(X, Y, cfg.logreg)


def _fit_stage(
    texts: list[str],
    label_sets: list[set[str]],
    label_names: list[str],
    cfg: TrainSettings,
    slot: int,
    backend: str,
    thresholds: dict[str, float],
) -> StageModel:
    Y = LabelMatrix.from_label_sets(label_sets, label_names)
    if backend == "tfidf":
        streams = [tp.prepare(t, cfg.prep) for t in texts]
        mask = tp.fit_vocab_mask(streams, cfg.prep)
        masked = [mask.apply(s) for s in streams]
        tfidf = ft.tfidf_fit(masked)
        X = ft.to_matrix(ft.tfidf_transform_many(tfidf, masked))
        clf = _fit_classifier(X, Y, cfg, slot)
        return StageModel(
            backend="tfidf", label_names=tuple(label_names), classifier=clf,
            thresholds=thresholds, prep=cfg.prep, mask=mask, tfidf=tfidf,
        )
    X = ft.to_matrix(ft.embed(cfg.embed_cfg, texts))
    clf = _fit_classifier(X, Y, cfg, slot)
    return StageModel(
        backend="embed", label_names=tuple(label_names), classifier=clf,
        thresholds=thresholds, prep=cfg.prep, embed_cfg=cfg.embed_cfg,
    )


@dataclass
class HierarchicalModel:
    ontology: Ontology
    stage1: StageModel
    branches: dict[str, StageModel | None]  # None = constant-negative branch
    settings: TrainSettings
    training_report: dict

    def predict(self, text: str, part_ref: str = "") -> Prediction:
        return self.predict_many([text], [part_ref])[0]

    def predict_many(self, texts: list[str], part_refs: list[str] | None = None) -> list[Prediction]:
        if part_refs is None:
            part_refs = [""] * len(texts)
        s1 = self.stage1.predict_proba_texts(texts)
        sev_hits: list[list[tuple[str, float]]] = []
        for row in s1:
            hits = []
            for code, p in zip(self.stage1.label_names, row):
                if p >= self.stage1.thresholds.get(code, self.settings.severity_threshold):
                    hits.append((code, float(p)))
            sev_hits.append(hits)

        # batch each branch over the rows that routed to it
        rows_for_branch: dict[str, list[int]] = {}
        for i, hits in enumerate(sev_hits):
            for code, _ in hits:
                if code != NEGATIVE and self.branches.get(code) is not None:
                    rows_for_branch.setdefault(code, []).append(i)
        diag_hits: dict[int, list[tuple[str, float, str]]] = {i: [] for i in range(len(texts))}
        for code, rows in rows_for_branch.items():
            branch = self.branches[code]
            probs = branch.predict_proba_texts([texts[i] for i in rows])
            for r, row in zip(rows, probs):
                for name, p in zip(branch.label_names, row):
                    if p >= branch.thresholds.get(name, self.settings.branch_threshold):
                        diag_hits[r].append((name, float(p), code))

        out = []
        for i, ref in enumerate(part_refs):
            hits = sev_hits[i]
            out.append(
                Prediction(
                    part_ref=ref,
                    severities=tuple(hits),
                    diagnoses=tuple(diag_hits[i]),
                    no_prediction=not hits,
                )
            )
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "hierarchical",
            "ontology_checksum": self.ontology.checksum,
            "stage1": self.stage1.to_dict(),
            "branches": {
                code: (branch.to_dict() if branch is not None else None)
                for code, branch in self.branches.items()
            },
            "severity_threshold": self.settings.severity_threshold,
            "branch_threshold": self.settings.branch_threshold,
            "seed": self.settings.seed,
            "training_report": self.training_report,
        }

    @classmethod
    def from_dict(cls, d: dict, ont: Ontology) -> "HierarchicalModel":
        stage1 = StageModel.from_dict(d["stage1"])
        settings = TrainSettings(
            prep=stage1.prep,
            severity_threshold=d["severity_threshold"],
            branch_threshold=d["branch_threshold"],
            seed=d["seed"],
        )
        return cls(
            ontology=ont,
            stage1=stage1,
            branches={
                code: (StageModel.from_dict(b) if b is not None else None)
                for code, b in d["branches"].items()
            },
            settings=settings,
            training_report=d.get("training_report", {}),
        )


@dataclass
class FlatModel:
    """Single-stage baseline over all diagnosis labels plus Negative."""

    ontology_checksum: str
    stage: StageModel
    settings: TrainSettings
    training_report: dict

    def predict_label_sets(self, texts: list[str]) -> list[set[str]]:
        probs = self.stage.predict_proba_texts(texts)
        out = []
        for row in probs:
            hit = {
                name
                for name, p in zip(self.stage.label_names, row)
                if p >= self.stage.thresholds.get(name, self.settings.branch_threshold)
            }
            out.append(hit)
        return out

    def to_dict(self) -> dict:
        return {
            "kind": "flat",
            "ontology_checksum": self.ontology_checksum,
            "stage1": self.stage.to_dict(),
            "severity_threshold": self.settings.severity_threshold,
            "branch_threshold": self.settings.branch_threshold,
            "seed": self.settings.seed,
            "training_report": self.training_report,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FlatModel":
        stage = StageModel.from_dict(d["stage1"])
        settings = TrainSettings(
            prep=stage.prep,
            severity_threshold=d["severity_threshold"],
            branch_threshold=d["branch_threshold"],
            seed=d["seed"],
        )
        return cls(
            ontology_checksum=d["ontology_checksum"],
            stage=stage,
            settings=settings,
            training_report=d.get("training_report", {}),
        )


def _check_gold(parts, ont: Ontology):
    for p in parts:
        for d in p.gold_diagnoses:
            if not ont.has_diagnosis(d):
                raise HierarchyError(f"unknown gold label {d!r} on part {p.report_id}/{p.part_id}")


def train_hierarchical(parts, ont: Ontology, cfg: TrainSettings = TrainSettings()) -> HierarchicalModel:
    """Stage 1 on all parts; each branch only on parts carrying its severity."""
    if not parts:
        raise HierarchyError("empty training corpus")
    _check_gold(parts, ont)
    texts = [p.text for p in parts]
    gold_sets = [set(p.gold_diagnoses) for p in parts]
    sev_sets = [derive_gold_severities(g, ont) for g in gold_sets]

    sev_thresholds = {
        code: cfg.severity_threshold_overrides.get(code, cfg.severity_threshold)
        for code in ont.severity_codes
    }
    stage1 = _fit_stage(
        texts, sev_sets, ont.severity_codes, cfg, slot=0,
        backend=cfg.stage1_backend, thresholds=sev_thresholds,
    )

    branches: dict[str, StageModel | None] = {}
    report = {"n_parts": len(parts), "branch_sizes": {}, "warnings": []}
    branch_codes = [c for c in ont.severity_codes if c != NEGATIVE]
    for bi, code in enumerate(branch_codes):
        labels = [d.name for d in ont.branch_labels(code)]
        rows = [i for i, sevs in enumerate(sev_sets) if code in sevs]
        report["branch_sizes"][code] = len(rows)
        if len(rows) < 2:
            msg = f"branch {code}: {len(rows)} training rows; constant-negative branch"
            report["warnings"].append(msg)
            warnings.warn(msg, stacklevel=2)
            branches[code] = None
            continue
        branch_sets = [gold_sets[i] & set(labels) for i in rows]
        branches[code] = _fit_stage(
            [texts[i] for i in rows], branch_sets, labels, cfg, slot=1 + bi,
            backend="tfidf", thresholds={},
        )
    report["warnings"].extend(stage1.classifier.warnings)
    return HierarchicalModel(
        ontology=ont, stage1=stage1, branches=branches, settings=cfg, training_report=report
    )


def train_flat(parts, ont: Ontology, cfg: TrainSettings = TrainSettings()) -> FlatModel:
    if not parts:
        raise HierarchyError("empty training corpus")
    _check_gold(parts, ont)
    texts = [p.text for p in parts]
    label_names = ont.diagnosis_names + [NEGATIVE]
    label_sets = [set(p.gold_diagnoses) or {NEGATIVE} for p in parts]
    stage = _fit_stage(
        texts, label_sets, label_names, cfg, slot=0,
        backend="tfidf", thresholds={},
    )
    report = {"n_parts": len(parts), "n_labels": len(label_names), "warnings": list(stage.classifier.warnings)}
    return FlatModel(
        ontology_checksum=ont.checksum, stage=stage, settings=cfg, training_report=report
    )
