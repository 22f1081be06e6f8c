"""Severity/diagnosis taxonomy: loading, validation and routing queries.

The taxonomy is configuration data, not code. A default file covering the
diagnosis labels we can source reliably ships under ``data/ontology.yaml``;
experiments that need a larger label space extend it with filler labels via
:func:`with_filler_labels`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

NEGATIVE = "NEG"


class OntologyError(ValueError):
    """Raised when an ontology document violates the schema or its invariants."""


@dataclass(frozen=True)
class SeverityCategory:
    code: str
    display_name: str


@dataclass(frozen=True)
class DiagnosisLabel:
    name: str
    severity: str


@dataclass(frozen=True)
class Ontology:
    severities: tuple[SeverityCategory, ...]
    diagnoses: tuple[DiagnosisLabel, ...]
    version: str
    checksum: str = field(default="", compare=False)

    def __post_init__(self):
        _validate(self.severities, self.diagnoses)
        if not self.checksum:
            object.__setattr__(self, "checksum", _checksum(self))

    @property
    def severity_codes(self) -> list[str]:
        return [s.code for s in self.severities]

    @property
    def diagnosis_names(self) -> list[str]:
        return [d.name for d in self.diagnoses]

    def branch_labels(self, sev: str) -> list[DiagnosisLabel]:
        """All diagnoses owned by severity ``sev``; empty for Negative."""
        if sev not in self.severity_codes:
            raise OntologyError(f"unknown severity code: {sev!r}")
        return [d for d in self.diagnoses if d.severity == sev]

    def severity_of(self, diagnosis: str) -> str:
        for d in self.diagnoses:
            if d.name == diagnosis:
                return d.severity
        raise OntologyError(f"unknown diagnosis: {diagnosis!r}")

    def has_diagnosis(self, name: str) -> bool:
        return any(d.name == name for d in self.diagnoses)

    def serialize(self) -> str:
        doc = {
            "version": self.version,
            "severities": [
                {"code": s.code, "display_name": s.display_name} for s in self.severities
            ],
            "diagnoses": [
                {"name": d.name, "severity": d.severity} for d in self.diagnoses
            ],
        }
        return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def _validate(severities, diagnoses):
    codes = [s.code for s in severities]
    if len(set(codes)) != len(codes):
        raise OntologyError("duplicate severity codes")
    if NEGATIVE not in codes:
        raise OntologyError(f"ontology must define the {NEGATIVE} severity")
    names = [d.name for d in diagnoses]
    dupes = {n for n in names if names.count(n) > 1}
    if dupes:
        raise OntologyError(f"duplicate diagnosis labels: {sorted(dupes)}")
    for d in diagnoses:
        if not d.name:
            raise OntologyError("empty diagnosis label")
        if d.name in codes:
            raise OntologyError(f"diagnosis {d.name!r} collides with a severity code")
        if d.severity not in codes:
            raise OntologyError(f"diagnosis {d.name!r} references unknown severity {d.severity!r}")
        if d.severity == NEGATIVE:
            raise OntologyError(f"diagnosis {d.name!r} may not map to {NEGATIVE}")


def _checksum(ont: Ontology) -> str:
    canonical = json.dumps(
        {
            "version": ont.version,
            "severities": [[s.code, s.display_name] for s in ont.severities],
            "diagnoses": [[d.name, d.severity] for d in ont.diagnoses],
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_ontology(text: str) -> Ontology:
    """Parse an ontology document from its YAML text."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise OntologyError(f"ontology document is not valid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise OntologyError("ontology document must be a mapping")
    for key in ("version", "severities", "diagnoses"):
        if key not in doc:
            raise OntologyError(f"ontology document missing {key!r}")
    try:
        severities = tuple(
            SeverityCategory(code=str(s["code"]), display_name=str(s["display_name"]))
            for s in doc["severities"]
        )
        diagnoses = tuple(
            DiagnosisLabel(name=str(d["name"]), severity=str(d["severity"]))
            for d in doc["diagnoses"]
        )
    except (TypeError, KeyError) as exc:
        raise OntologyError(f"malformed ontology entry: {exc}") from exc
    return Ontology(severities=severities, diagnoses=diagnoses, version=str(doc["version"]))


def load_ontology(path: str | Path) -> Ontology:
    return parse_ontology(Path(path).read_text(encoding="utf-8"))


def default_ontology() -> Ontology:
    text = resources.files("sevdx.data").joinpath("ontology.yaml").read_text(encoding="utf-8")
    return parse_ontology(text)


def with_filler_labels(ont: Ontology, total_labels: int, prefix: str = "synthetic lesion") -> Ontology:
    """Extend an ontology with filler diagnosis labels up to ``total_labels``.

    Fillers are spread round-robin over the non-Negative severities so every
    branch keeps a non-trivial label space in synthetic experiments.
    """
    if total_labels < len(ont.diagnoses):
        raise OntologyError("total_labels smaller than the existing label count")
    branch_codes = [c for c in ont.severity_codes if c != NEGATIVE]
    extra = []
    for i in range(total_labels - len(ont.diagnoses)):
        extra.append(
            DiagnosisLabel(
                name=f"{prefix} type {i + 1}",
                severity=branch_codes[i % len(branch_codes)],
            )
        )
    return Ontology(
        severities=ont.severities,
        diagnoses=ont.diagnoses + tuple(extra),
        version=f"{ont.version}+filler{len(extra)}",
    )
