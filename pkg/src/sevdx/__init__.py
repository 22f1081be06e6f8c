"""Severity/diagnosis classification engine for breast pathology specimen reports."""

from .ontology import (
    DiagnosisLabel,
    Ontology,
    OntologyError,
    SeverityCategory,
    default_ontology,
    load_ontology,
    parse_ontology,
)

__version__ = "0.1.0"

__all__ = [
    "DiagnosisLabel",
    "Ontology",
    "OntologyError",
    "SeverityCategory",
    "default_ontology",
    "load_ontology",
    "parse_ontology",
    "__version__",
]
