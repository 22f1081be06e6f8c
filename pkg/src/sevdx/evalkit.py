"""Split protocol, multi-label metrics, McNemar significance and error taxonomy.

"Accuracy" on multi-label outputs means subset accuracy (exact label-set
match); every report header carries that convention. Macro averages exclude
zero-support labels unless asked otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chi2

from .learners import LabelMatrix
from .ontology import NEGATIVE, Ontology

ACCURACY_CONVENTION = "accuracy = subset accuracy (exact label-set match)"


class EvalError(ValueError):
    pass


@dataclass(frozen=True)
class SplitConfig:
    fractions: tuple[float, float, float] = (0.60, 0.20, 0.20)
    seed: int = 0

    def __post_init__(self):
        if any(f < 0 for f in self.fractions):
            raise EvalError("fractions must be non-negative")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise EvalError("fractions must sum to 1")
        if self.fractions[1] <= 0 or self.fractions[2] <= 0:
            raise EvalError("validation and test fractions must be positive")


def split(corpus: list, cfg: SplitConfig = SplitConfig()) -> tuple[list, list, list]:
    """Seeded shuffle then contiguous slices: train=floor, val=floor, test=rest."""
    n = len(corpus)
    if n < 5:
        raise EvalError("corpus too small to split")
    rng = np.random.default_rng(cfg.seed)
    order = rng.permutation(n)
    n_train = int(np.floor(n * cfg.fractions[0]))
    n_val = int(np.floor(n * cfg.fractions[1]))
    train = [corpus[i] for i in order[:n_train]]
    val = [corpus[i] for i in order[n_train : n_train + n_val]]
    test = [corpus[i] for i in order[n_train + n_val :]]
    return train, val, test


@dataclass(frozen=True)
class LabelScore:
    precision: float
    recall: float
    f1: float
    support: int
    tp: int
    fp: int
    fn: int


@dataclass(frozen=True)
class EvalReport:
    per_label: dict[str, LabelScore]
    micro_precision: float
    micro_recall: float
    micro_f1: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    subset_accuracy: float
    n_samples: int
    convention: str = ACCURACY_CONVENTION

    def to_dict(self) -> dict:
        return {
            "convention": self.convention,
            "n_samples": self.n_samples,
            "subset_accuracy": self.subset_accuracy,
            "micro": {"precision": self.micro_precision, "recall": self.micro_recall, "f1": self.micro_f1},
            "macro": {"precision": self.macro_precision, "recall": self.macro_recall, "f1": self.macro_f1},
            "per_label": {
                name: {
                    "precision": s.precision, "recall": s.recall, "f1": s.f1,
                    "support": s.support, "tp": s.tp, "fp": s.fp, "fn": s.fn,
                }
                for name, s in self.per_label.items()
            },
        }


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * p * r / (p + r) if p + r else 0.0
    return p, r, f


def metrics(gold: LabelMatrix, pred: LabelMatrix, include_zero_support: bool = False) -> EvalReport:
    if gold.bits.shape != pred.bits.shape or gold.label_names != pred.label_names:
        raise EvalError("gold/pred shape or label mismatch")
    g, p = gold.bits, pred.bits
    per_label: dict[str, LabelScore] = {}
    macro_rows = []
    for i, name in enumerate(gold.label_names):
        tp = int((g[:, i] & p[:, i]).sum())
        fp = int((~g[:, i] & p[:, i]).sum())
        fn = int((g[:, i] & ~p[:, i]).sum())
        support = int(g[:, i].sum())
        pr, rc, f1 = _prf(tp, fp, fn)
        score = LabelScore(pr, rc, f1, support, tp, fp, fn)
        per_label[name] = score
        if support > 0 or include_zero_support:
            macro_rows.append(score)
    tp_all = sum(s.tp for s in per_label.values())
    fp_all = sum(s.fp for s in per_label.values())
    fn_all = sum(s.fn for s in per_label.values())
    mi_p, mi_r, mi_f = _prf(tp_all, fp_all, fn_all)
    if macro_rows:
        ma_p = float(np.mean([s.precision for s in macro_rows]))
        ma_r = float(np.mean([s.recall for s in macro_rows]))
        ma_f = float(np.mean([s.f1 for s in macro_rows]))
    else:
        ma_p = ma_r = ma_f = 0.0
    subset = float((g == p).all(axis=1).mean()) if g.shape[0] else 0.0
    return EvalReport(
        per_label=per_label,
        micro_precision=mi_p, micro_recall=mi_r, micro_f1=mi_f,
        macro_precision=ma_p, macro_recall=ma_r, macro_f1=ma_f,
        subset_accuracy=subset, n_samples=g.shape[0],
    )


@dataclass(frozen=True)
class McNemarResult:
    b: int  # a correct, b wrong
    c: int  # a wrong, b correct
    statistic: float
    p_value: float

    def to_dict(self) -> dict:
        return {"b": self.b, "c": self.c, "statistic": self.statistic, "p_value": self.p_value}


def mcnemar_counts(b: int, c: int) -> McNemarResult:
    """Continuity-corrected chi-square McNemar statistic from discordant counts."""
    if b + c == 0:
        return McNemarResult(b=b, c=c, statistic=0.0, p_value=1.0)
    stat = (abs(b - c) - 1) ** 2 / (b + c)
    return McNemarResult(b=b, c=c, statistic=float(stat), p_value=float(chi2.sf(stat, df=1)))


def mcnemar(pred_a: LabelMatrix, pred_b: LabelMatrix, gold: LabelMatrix) -> McNemarResult:
    """Pooled over all (row, label) decisions; per-label variant below."""
    for m in (pred_a, pred_b):
        if m.bits.shape != gold.bits.shape or m.label_names != gold.label_names:
            raise EvalError("prediction/gold shape or label mismatch")
    correct_a = pred_a.bits == gold.bits
    correct_b = pred_b.bits == gold.bits
    b = int((correct_a & ~correct_b).sum())
    c = int((~correct_a & correct_b).sum())
    return mcnemar_counts(b, c)


def mcnemar_per_label(pred_a: LabelMatrix, pred_b: LabelMatrix, gold: LabelMatrix) -> dict[str, McNemarResult]:
    out = {}
    for i, name in enumerate(gold.label_names):
        ca = pred_a.bits[:, i] == gold.bits[:, i]
        cb = pred_b.bits[:, i] == gold.bits[:, i]
        out[name] = mcnemar_counts(int((ca & ~cb).sum()), int((~ca & cb).sum()))
    return out


WRONG_DIAGNOSIS = "WRONG_DIAGNOSIS"
MISSED_DIAGNOSIS = "MISSED_DIAGNOSIS"
SPURIOUS_DIAGNOSIS = "SPURIOUS_DIAGNOSIS"

# predicted probability at or above this against gold marks a review candidate
REVIEW_CONFIDENCE = 0.9


@dataclass(frozen=True)
class ErrorCase:
    part_ref: str
    category: str
    label: str | None = None
    severity_pair: tuple[str, str] | None = None  # (gold severity, predicted severity)
    review_candidate: bool = False


def _ordered(labels: set[str], ont: Ontology) -> list[str]:
    order = {name: i for i, name in enumerate(ont.diagnosis_names)}
    order[NEGATIVE] = len(order)
    return sorted(labels, key=lambda x: order[x])


def categorize_errors(
    gold_sets: list[set[str]],
    pred_sets: list[set[str]],
    ont: Ontology,
    part_refs: list[str] | None = None,
    pred_probs: list[dict[str, float]] | None = None,
) -> tuple[list[ErrorCase], dict[tuple[str, str], int]]:
    """Deterministic error taxonomy over per-part diagnosis label sets.

    Negative parts are represented by the empty gold/pred set. A missed gold
    label paired with a spurious predicted label of a different severity
    becomes one WRONG_DIAGNOSIS carrying the severity confusion pair; labels
    are paired greedily in ontology order. The "incorrect ground truth"
    category needs human judgment, so high-confidence disagreements are only
    flagged as review candidates.
    """
    if part_refs is None:
        part_refs = [str(i) for i in range(len(gold_sets))]
    cases: list[ErrorCase] = []
    adjacency: dict[tuple[str, str], int] = {}

    def sev_of(label: str) -> str:
        return NEGATIVE if label == NEGATIVE else ont.severity_of(label)

    for row, (gold, pred, ref) in enumerate(zip(gold_sets, pred_sets, part_refs)):
        for lab in gold | pred:
            if lab != NEGATIVE and not ont.has_diagnosis(lab):
                raise EvalError(f"unknown label {lab!r} in part {ref}")
        # empty sets stand for Negative on both sides
        g = gold or {NEGATIVE}
        p = pred or {NEGATIVE}
        missed = _ordered(g - p, ont)
        spurious = _ordered(p - g, ont)

        probs = pred_probs[row] if pred_probs else {}
        while missed and spurious and sev_of(missed[0]) != sev_of(spurious[0]):
            m, s = missed.pop(0), spurious.pop(0)
            pair = (sev_of(m), sev_of(s))
            adjacency[pair] = adjacency.get(pair, 0) + 1
            cases.append(
                ErrorCase(
                    part_ref=ref,
                    category=WRONG_DIAGNOSIS,
                    label=s,
                    severity_pair=pair,
                    review_candidate=probs.get(s, 0.0) >= REVIEW_CONFIDENCE,
                )
            )
        for m in missed:
            if m == NEGATIVE:
                continue
            cases.append(ErrorCase(part_ref=ref, category=MISSED_DIAGNOSIS, label=m))
        for s in spurious:
            if s == NEGATIVE:
                continue
            cases.append(
                ErrorCase(
                    part_ref=ref,
                    category=SPURIOUS_DIAGNOSIS,
                    label=s,
                    review_candidate=probs.get(s, 0.0) >= REVIEW_CONFIDENCE,
                )
            )
    return cases, adjacency
