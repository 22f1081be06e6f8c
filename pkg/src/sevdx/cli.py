"""Command-line surface: train, predict, eval, compare, synth, split, serve."""

from __future__ import annotations

import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np
import yaml

from . import corpusio, evalkit, reportfig
from .features import EmbedProviderConfig
from .hierarchy import (
    FlatModel,
    HierarchicalModel,
    TrainSettings,
    train_flat,
    train_hierarchical,
)
from .learners import ForestConfig, LabelMatrix, LogRegConfig
from .ontology import NEGATIVE, Ontology, default_ontology, load_ontology
from .textprep import PrepConfig


def _load_ont(path: str | None) -> Ontology:
    return load_ontology(path) if path else default_ontology()


def _settings(config_path: str | None, seed: int, classifier: str, backend: str,
              embed_endpoint: str | None, threshold: float) -> TrainSettings:
    overrides = {}
    if config_path:
        overrides = yaml.safe_load(Path(config_path).read_text(encoding="utf-8")) or {}
    prep = PrepConfig.from_dict({**PrepConfig().to_dict(), **overrides.get("prep", {})})
    forest = ForestConfig(**{**ForestConfig().__dict__, **overrides.get("forest", {})})
    logreg = LogRegConfig(**{**LogRegConfig().__dict__, **overrides.get("logreg", {})})
    embed_cfg = None
    if backend == "embed":
        endpoint = embed_endpoint or overrides.get("embed", {}).get("endpoint")
        if not endpoint:
            raise click.UsageError("--backend embed requires --embed-endpoint")
        embed_cfg = EmbedProviderConfig(endpoint=endpoint, **overrides.get("embed_extra", {}))
    return TrainSettings(
        prep=prep,
        classifier=classifier,
        forest=forest,
        logreg=logreg,
        seed=seed,
        severity_threshold=threshold,
        branch_threshold=overrides.get("branch_threshold", threshold),
        severity_threshold_overrides=overrides.get("severity_thresholds", {}),
        stage1_backend=backend,
        embed_cfg=embed_cfg,
    )


def label_space(ont: Ontology) -> list[str]:
    return ont.diagnosis_names + [NEGATIVE]


def gold_label_sets(parts) -> list[set[str]]:
    return [set(p.gold_diagnoses) or {NEGATIVE} for p in parts]


def predicted_label_sets(model, parts) -> list[set[str]]:
    """Predicted diagnosis sets over the shared diagnoses+Negative space."""
    texts = [p.text for p in parts]
    if isinstance(model, FlatModel):
        return model.predict_label_sets(texts)
    preds = model.predict_many(texts)
    out = []
    for pred in preds:
        labels = pred.diagnosis_names()
        if NEGATIVE in pred.severity_codes():
            labels = labels | {NEGATIVE}
        out.append(labels)
    return out


def evaluate_bundle(model, parts, ont: Ontology) -> evalkit.EvalReport:
    names = label_space(ont)
    gold = LabelMatrix.from_label_sets(gold_label_sets(parts), names)
    pred = LabelMatrix.from_label_sets(predicted_label_sets(model, parts), names)
    return evalkit.metrics(gold, pred)


@click.group()
def main():
    """Hierarchical severity/diagnosis classification engine."""


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True), help="Ontology YAML (default: shipped).")
@click.option("--config", "config_path", type=click.Path(exists=True), help="Training config YAML.")
@click.option("--out", "out_path", required=True, type=click.Path(), help="Bundle output directory.")
@click.option("--flat/--hierarchical", "flat", default=False)
@click.option("--seed", default=0, show_default=True)
@click.option("--classifier", type=click.Choice(["forest", "logreg"]), default="forest", show_default=True)
@click.option("--backend", type=click.Choice(["tfidf", "embed"]), default="tfidf", show_default=True)
@click.option("--embed-endpoint", default=None, help="Embedding provider URL for --backend embed.")
@click.option("--threshold", default=0.5, show_default=True)
def train(corpus, ontology_path, config_path, out_path, flat, seed, classifier, backend, embed_endpoint, threshold):
    """Train a model on a labeled corpus and write a bundle."""
    ont = _load_ont(ontology_path)
    parts = corpusio.read_corpus(corpus, ont)
    cfg = _settings(config_path, seed, classifier, backend, embed_endpoint, threshold)
    model = train_flat(parts, ont, cfg) if flat else train_hierarchical(parts, ont, cfg)
    corpusio.save_bundle(model, out_path)
    click.echo(json.dumps(model.training_report, indent=2, sort_keys=True))
    click.echo(f"bundle written to {out_path}")


@main.command()
@click.argument("text", required=False)
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True))
@click.option("--input", "input_path", type=click.Path(exists=True), help="Corpus CSV to predict in batch.")
def predict(text, bundle, ontology_path, input_path):
    """Predict severities and diagnoses for a specimen text or corpus file."""
    ont = _load_ont(ontology_path)
    model = corpusio.load_bundle(bundle, ont)
    if (text is None) == (input_path is None):
        raise click.UsageError("provide either TEXT or --input, not both")
    if text is not None:
        parts = [corpusio.LabeledPart(report_id="cli", part_id="WHOLE", text=text)]
    else:
        parts = corpusio.read_corpus(input_path, ont)
    if isinstance(model, FlatModel):
        for part, labels in zip(parts, model.predict_label_sets([p.text for p in parts])):
            click.echo(json.dumps({"report_id": part.report_id, "part_id": part.part_id,
                                   "labels": sorted(labels)}, ensure_ascii=False))
        return
    for part, pred in zip(parts, model.predict_many([p.text for p in parts])):
        click.echo(json.dumps({
            "report_id": part.report_id,
            "part_id": part.part_id,
            "severities": [{"label": c, "probability": p} for c, p in pred.severities],
            "diagnoses": [{"label": n, "probability": p, "severity": s} for n, p, s in pred.diagnoses],
            "no_prediction": pred.no_prediction,
        }, ensure_ascii=False))


def _write_report_files(report: evalkit.EvalReport, out_dir: Path, stem: str):
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{stem}.json").write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True), encoding="utf-8"
    )
    with open(out_dir / f"{stem}.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["label", "precision", "recall", "f1", "support"])
        for name, s in report.per_label.items():
            writer.writerow([name, f"{s.precision:.6f}", f"{s.recall:.6f}", f"{s.f1:.6f}", s.support])
        writer.writerow(["__micro__", f"{report.micro_precision:.6f}", f"{report.micro_recall:.6f}", f"{report.micro_f1:.6f}", report.n_samples])
        writer.writerow(["__macro__", f"{report.macro_precision:.6f}", f"{report.macro_recall:.6f}", f"{report.macro_f1:.6f}", report.n_samples])
    reportfig.per_label_f1_figure(report, out_dir / f"{stem}.png", title=stem)


@main.command("eval")
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True))
@click.option("--out", "out_dir", default="eval_out", show_default=True, type=click.Path())
def eval_cmd(corpus, bundle, ontology_path, out_dir):
    """Evaluate a bundle on a labeled test corpus; write CSV, JSON and figure."""
    ont = _load_ont(ontology_path)
    parts = corpusio.read_corpus(corpus, ont)
    if not parts:
        raise click.ClickException("empty test corpus")
    model = corpusio.load_bundle(bundle, ont)
    report = evaluate_bundle(model, parts, ont)
    click.echo(evalkit.ACCURACY_CONVENTION)
    click.echo(json.dumps({
        "micro_f1": report.micro_f1, "macro_f1": report.macro_f1,
        "subset_accuracy": report.subset_accuracy, "n": report.n_samples,
    }, indent=2, sort_keys=True))
    _write_report_files(report, Path(out_dir), "eval")
    click.echo(f"report written to {out_dir}/")


@main.command()
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--bundle-a", required=True, type=click.Path(exists=True))
@click.option("--bundle-b", required=True, type=click.Path(exists=True))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True))
@click.option("--per-label", is_flag=True, help="Also run McNemar per label.")
@click.option("--out", "out_dir", default="compare_out", show_default=True, type=click.Path())
def compare(corpus, bundle_a, bundle_b, ontology_path, per_label, out_dir):
    """Pairwise McNemar comparison of two bundles on the same test corpus."""
    ont = _load_ont(ontology_path)
    parts = corpusio.read_corpus(corpus, ont)
    if not parts:
        raise click.ClickException("empty test corpus")
    model_a = corpusio.load_bundle(bundle_a, ont)
    model_b = corpusio.load_bundle(bundle_b, ont)
    names = label_space(ont)
    gold = LabelMatrix.from_label_sets(gold_label_sets(parts), names)
    pa = LabelMatrix.from_label_sets(predicted_label_sets(model_a, parts), names)
    pb = LabelMatrix.from_label_sets(predicted_label_sets(model_b, parts), names)
    result = evalkit.mcnemar(pa, pb, gold)
    rep_a = evalkit.metrics(gold, pa)
    rep_b = evalkit.metrics(gold, pb)
    summary = {
        "mcnemar": result.to_dict(),
        "a": {"micro_f1": rep_a.micro_f1, "macro_f1": rep_a.macro_f1},
        "b": {"micro_f1": rep_b.micro_f1, "macro_f1": rep_b.macro_f1},
    }
    if per_label:
        summary["per_label"] = {
            name: r.to_dict() for name, r in evalkit.mcnemar_per_label(pa, pb, gold).items()
        }
    click.echo(json.dumps(summary, indent=2, sort_keys=True))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "compare.json").write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    _write_report_files(rep_a, out, "model_a")
    _write_report_files(rep_b, out, "model_b")
    reportfig.comparison_figure(rep_a, rep_b, result, out / "compare.png",
                                name_a=Path(bundle_a).name, name_b=Path(bundle_b).name)
    click.echo(f"comparison written to {out_dir}/")


@main.command()
@click.option("--ontology", "ontology_path", type=click.Path(exists=True))
@click.option("--n", "n_parts", default=1000, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--labels", "n_labels", default=None, type=int,
              help="Use the first N ontology labels (default: all).")
@click.option("--co-occurrence", default=0.15, show_default=True)
@click.option("--noise", default=0.2, show_default=True)
@click.option("--neg-rate", default=0.25, show_default=True,
              help="Approximate fraction of Negative parts.")
@click.option("--out", "out_path", required=True, type=click.Path())
def synth(ontology_path, n_parts, seed, n_labels, co_occurrence, noise, neg_rate, out_path):
    """Generate a seeded synthetic labeled corpus."""
    ont = _load_ont(ontology_path)
    cfg = default_synth_config(ont, n_parts=n_parts, seed=seed, n_labels=n_labels,
                               co_occurrence=co_occurrence, noise=noise, neg_rate=neg_rate)
    parts = corpusio.generate_synth(cfg, ont)
    corpusio.write_corpus(parts, out_path)
    click.echo(f"{len(parts)} parts written to {out_path}")


def default_synth_config(ont: Ontology, n_parts: int, seed: int = 0, n_labels: int | None = None,
                         co_occurrence: float = 0.15, noise: float = 0.2,
                         neg_rate: float = 0.25, imbalance: float = 6.0) -> corpusio.SynthConfig:
    """Priors decay geometrically across labels to mimic clinical imbalance."""
    labels = ont.diagnosis_names[: n_labels or len(ont.diagnosis_names)]
    k = len(labels)
    weights = np.array([imbalance ** (-i / max(1, k - 1)) for i in range(k)])
    # scale so the expected no-label (Negative) fraction is about neg_rate
    target_mean = 1.0 - neg_rate ** (1.0 / k)
    priors = weights * (target_mean / weights.mean())
    priors = np.clip(priors, 1e-4, 0.95)
    return corpusio.SynthConfig(
        seed=seed,
        n_parts=n_parts,
        label_priors={lab: float(p) for lab, p in zip(labels, priors)},
        co_occurrence_rate=co_occurrence,
        noise_rate=noise,
    )


@main.command("split")
@click.argument("corpus", type=click.Path(exists=True))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True))
@click.option("--fractions", default="0.6,0.2,0.2", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out-prefix", default="split", show_default=True)
def split_cmd(corpus, ontology_path, fractions, seed, out_prefix):
    """Seeded train/val/test partition of a corpus file."""
    ont = _load_ont(ontology_path)
    parts = corpusio.read_corpus(corpus, ont)
    fracs = tuple(float(f) for f in fractions.split(","))
    cfg = evalkit.SplitConfig(fractions=fracs, seed=seed)
    train_p, val_p, test_p = evalkit.split(parts, cfg)
    for name, chunk in (("train", train_p), ("val", val_p), ("test", test_p)):
        path = f"{out_prefix}.{name}.csv"
        corpusio.write_corpus(chunk, path)
        click.echo(f"{name}: {len(chunk)} parts -> {path}")


@main.command()
@click.option("--bundle", required=True, type=click.Path(exists=True))
@click.option("--ontology", "ontology_path", type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(bundle, ontology_path, host, port):
    """Serve the prediction API for a trained bundle."""
    from .service import ServiceConfig, run

    run(ServiceConfig(host=host, port=port, bundle_path=bundle, ontology_path=ontology_path))


if __name__ == "__main__":
    sys.exit(main())
