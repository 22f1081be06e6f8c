"""Corpus file formats, synthetic corpus generation and model-bundle persistence.

Corpus files are UTF-8 CSV with header ``report_id,part_id,text,labels``
(labels ';'-joined inside one field, empty = Negative); a JSON-lines
alternative is accepted for batch input. A model bundle is a directory whose
manifest hashes every entry, so a bundle is self-describing and tamper-evident.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ontology import NEGATIVE, Ontology

ENGINE_VERSION = "0.1.0"
BUNDLE_FORMAT = 1


class CorpusError(ValueError):
    pass


class BundleError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPart:
    report_id: str
    part_id: str
    text: str
    gold_diagnoses: tuple[str, ...] = ()


def read_corpus_text(text: str, ont: Ontology) -> list[LabeledPart]:
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise CorpusError("empty corpus file")
    header = rows[0]
    if header != ["report_id", "part_id", "text", "labels"]:
        raise CorpusError(f"bad header: expected report_id,part_id,text,labels got {header}")
    parts = []
    seen = set()
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 4:
            raise CorpusError(f"line {lineno}: expected 4 fields, got {len(row)}")
        report_id, part_id, body, labels_field = row
        if not report_id or not part_id:
            raise CorpusError(f"line {lineno}: report_id and part_id must be non-empty")
        key = (report_id, part_id)
        if key in seen:
            raise CorpusError(f"line {lineno}: duplicate part {report_id}/{part_id}")
        seen.add(key)
        labels = tuple(l.strip() for l in labels_field.split(";") if l.strip())
        for lab in labels:
            if not ont.has_diagnosis(lab):
                raise CorpusError(f"line {lineno}: unknown label {lab!r} on {report_id}/{part_id}")
        parts.append(LabeledPart(report_id=report_id, part_id=part_id, text=body, gold_diagnoses=labels))
    return parts


def read_corpus(path: str | Path, ont: Ontology) -> list[LabeledPart]:
    return read_corpus_text(Path(path).read_text(encoding="utf-8"), ont)


def write_corpus_text(parts: list[LabeledPart]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["report_id", "part_id", "text", "labels"])
    for p in parts:
        writer.writerow([p.report_id, p.part_id, p.text, ";".join(p.gold_diagnoses)])
    return buf.getvalue()


def write_corpus(parts: list[LabeledPart], path: str | Path):
    Path(path).write_text(write_corpus_text(parts), encoding="utf-8", newline="")


def read_corpus_jsonl(text: str, ont: Ontology) -> list[LabeledPart]:
    """One-record-per-line alternative for the batch API."""
    parts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"line {lineno}: invalid JSON record: {exc}") from exc
        labels = tuple(rec.get("labels", ()))
        for lab in labels:
            if not ont.has_diagnosis(lab):
                raise CorpusError(f"line {lineno}: unknown label {lab!r}")
        parts.append(
            LabeledPart(
                report_id=str(rec.get("report_id", lineno)),
                part_id=str(rec.get("part_id", "WHOLE")),
                text=rec["text"],
                gold_diagnoses=labels,
            )
        )
    return parts


# ---------------------------------------------------------------------------
# synthetic corpus generation

_FILLER_VOCAB = [
    "breast", "tissue", "specimen", "left", "right", "margin", "excision",
    "biopsy", "core", "needle", "segmental", "mastectomy", "lumpectomy",
    "present", "identified", "microcalcifications", "submitted", "evaluation",
    "section", "received", "measuring", "cm", "fragments", "unremarkable",
    "stroma", "ducts", "lobules", "adipose", "fibrous", "consistent",
]

_HEADERS = [
    "BRX Left breast mass, core biopsy:",
    "BRSTWLN Right breast partial mastectomy:",
    "LNDIS Right axillary lymph node, excision:",
    "BRLUMP Re-excision, right breast:",
    "FNA Fine Needle Aspiration, Axillary Mass:",
    "SLOS 3 Slides, outside consult:",
]

_NEG_BOILERPLATE = "negative for malignancy"


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    n_parts: int = 1000
    label_priors: dict = field(default_factory=dict)  # diagnosis -> prior in (0, 1]
    signal_terms: dict = field(default_factory=dict)  # diagnosis -> list of tokens
    filler_vocab: tuple[str, ...] = tuple(_FILLER_VOCAB)
    filler_length_range: tuple[int, int] = (8, 30)
    co_occurrence_rate: float = 0.0
    noise_rate: float = 0.0

    def __post_init__(self):
        for lab, p in self.label_priors.items():
            if not 0 < p <= 1:
                raise CorpusError(f"prior for {lab!r} must be in (0, 1]")
        if not 0 <= self.co_occurrence_rate <= 1 or not 0 <= self.noise_rate <= 1:
            raise CorpusError("rates must be in [0, 1]")


def default_signal_terms(
    labels: list[str], n_terms: int = 4, severity_of=None
) -> dict[str, list[str]]:
    """Distinctive per-label tokens: label words plus synthetic marker tokens.

    When ``severity_of`` (label -> severity code) is given, every label also
    gets one token shared across its severity, mirroring the shared
    severity-level vocabulary of real reports ("carcinoma", "atypical", ...).
    """
    out = {}
    for i, lab in enumerate(labels):
        words = [w for w in lab.replace("(", " ").replace(")", " ").split() if w != "-"]
        markers = [f"marker{i}x{j}" for j in range(max(1, n_terms - len(words)))]
        terms = (words + markers)[: max(3, n_terms)]
        if severity_of is not None:
            terms = terms + [f"sev{severity_of(lab).lower()}term"]
        out[lab] = terms
    return out


def generate_synth(cfg: SynthConfig, ont: Ontology) -> list[LabeledPart]:
    """Seeded corpus of specimen-part texts with known gold label sets.

    Each label is drawn independently with its prior (so label marginals match
    the priors); single-label parts gain one extra co-occurring label with
    probability co_occurrence_rate. Signal terms are dropped with probability
    noise_rate. Negative parts carry only filler plus negative boilerplate.
    """
    if not cfg.label_priors:
        raise CorpusError("label_priors must be non-empty")
    for lab in cfg.label_priors:
        if not ont.has_diagnosis(lab):
            raise CorpusError(f"prior label {lab!r} not in ontology")
    labels = sorted(cfg.label_priors)
    shared_ok: set[str] = set()
    if cfg.signal_terms:
        signals = dict(cfg.signal_terms)
    else:
        signals = default_signal_terms(labels, severity_of=ont.severity_of)
        shared_ok = {f"sev{c.lower()}term" for c in ont.severity_codes}
    for lab in labels:
        if lab not in signals:
            raise CorpusError(f"no signal terms for {lab!r}")
    _warn_overlapping_signals(signals, shared_ok)

    rng = np.random.default_rng(cfg.seed)
    priors = np.array([cfg.label_priors[l] for l in labels])
    parts = []
    for i in range(cfg.n_parts):
        draws = rng.random(len(labels)) < priors
        chosen = [labels[j] for j in np.flatnonzero(draws)]
        if len(chosen) == 1 and rng.random() < cfg.co_occurrence_rate:
            others = [l for l in labels if l != chosen[0]]
            w = np.array([cfg.label_priors[l] for l in others])
            chosen.append(str(rng.choice(others, p=w / w.sum())))

        header = _HEADERS[int(rng.integers(len(_HEADERS)))]
        n_fill = int(rng.integers(cfg.filler_length_range[0], cfg.filler_length_range[1] + 1))
        words = list(rng.choice(cfg.filler_vocab, size=n_fill))
        if chosen:
            for lab in chosen:
                for term in signals[lab]:
                    if rng.random() >= cfg.noise_rate:
                        words.insert(int(rng.integers(len(words) + 1)), term)
        else:
            words.insert(int(rng.integers(len(words) + 1)), _NEG_BOILERPLATE)
        parts.append(
            LabeledPart(
                report_id=f"synth-{i:05d}",
                part_id="A",
                text=f"{header} {' '.join(words)}.",
                gold_diagnoses=tuple(sorted(chosen)),
            )
        )
    return parts


def _warn_overlapping_signals(signals: dict[str, list[str]], shared_ok: set[str] = frozenset()):
    import warnings

    seen: dict[str, str] = {}
    for lab, terms in signals.items():
        for t in terms:
            if t in shared_ok:
                continue
            if t in seen and seen[t] != lab:
                warnings.warn(f"signal term {t!r} shared by {seen[t]!r} and {lab!r}", stacklevel=3)
            seen[t] = lab


# ---------------------------------------------------------------------------
# model bundles

def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def save_bundle(model, path: str | Path) -> Path:
    """Persist a trained hierarchical or flat model as a hashed directory."""
    from .hierarchy import FlatModel, HierarchicalModel

    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    d = model.to_dict()
    entries: dict[str, bytes] = {}

    if isinstance(model, HierarchicalModel):
        entries["ontology"] = model.ontology.serialize().encode("utf-8")
        entries["stage1/model.json"] = _canonical_json(d["stage1"])
        for code, branch in d["branches"].items():
            entries[f"branches/{code}/model.json"] = _canonical_json(branch)
        ont_checksum = model.ontology.checksum
    elif isinstance(model, FlatModel):
        entries["stage1/model.json"] = _canonical_json(d["stage1"])
        ont_checksum = model.ontology_checksum
    else:
        raise BundleError(f"cannot bundle object of type {type(model).__name__}")

    entries["prep"] = _canonical_json(d["stage1"]["prep"])
    manifest = {
        "engine_version": ENGINE_VERSION,
        "bundle_format": BUNDLE_FORMAT,
        "kind": d["kind"],
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "ontology_checksum": ont_checksum,
        "seed": d["seed"],
        "severity_threshold": d["severity_threshold"],
        "branch_threshold": d["branch_threshold"],
        "training_report": d["training_report"],
        "entries": {name: _sha256(data) for name, data in entries.items()},
    }
    for name, data in entries.items():
        target = path / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_bytes(data)
    (path / "manifest.json").write_bytes(
        json.dumps(manifest, sort_keys=True, indent=2, ensure_ascii=False).encode("utf-8")
    )
    return path


def load_bundle(path: str | Path, ont: Ontology):
    """Verify the manifest and rebuild the model; no partial loads."""
    from .hierarchy import FlatModel, HierarchicalModel

    path = Path(path)
    manifest_path = path / "manifest.json"
    if not manifest_path.exists():
        raise BundleError(f"no manifest at {path}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("bundle_format") != BUNDLE_FORMAT:
        raise BundleError(
            f"bundle format {manifest.get('bundle_format')} not supported by engine {ENGINE_VERSION}"
        )
    if manifest.get("engine_version") != ENGINE_VERSION:
        raise BundleError(
            f"bundle written by engine {manifest.get('engine_version')}, this engine is {ENGINE_VERSION}"
        )
    if manifest["ontology_checksum"] != ont.checksum:
        raise BundleError(
            "ontology checksum mismatch: bundle was trained against a different ontology"
        )
    blobs: dict[str, bytes] = {}
    for name, digest in manifest["entries"].items():
        data = (path / name).read_bytes()
        if _sha256(data) != digest:
            raise BundleError(f"bundle entry {name!r} failed its hash check")
        blobs[name] = data

    stage1 = json.loads(blobs["stage1/model.json"])
    common = {
        "ontology_checksum": manifest["ontology_checksum"],
        "stage1": stage1,
        "severity_threshold": manifest["severity_threshold"],
        "branch_threshold": manifest["branch_threshold"],
        "seed": manifest["seed"],
        "training_report": manifest.get("training_report", {}),
    }
    if manifest["kind"] == "hierarchical":
        branches = {}
        for name, data in blobs.items():
            if name.startswith("branches/"):
                code = name.split("/")[1]
                branches[code] = json.loads(data)
        return HierarchicalModel.from_dict({**common, "branches": branches}, ont)
    if manifest["kind"] == "flat":
        return FlatModel.from_dict(common)
    raise BundleError(f"unknown bundle kind {manifest['kind']!r}")
