"""Matplotlib figures rendered next to the delimited evaluation output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evalkit import EvalReport, McNemarResult


def per_label_f1_figure(report: EvalReport, path: str | Path, title: str = "Per-label F1"):
    rows = [(name, s.f1, s.support) for name, s in report.per_label.items() if s.support > 0]
    rows.sort(key=lambda r: r[1])
    names = [r[0] for r in rows]
    f1s = [r[1] for r in rows]
    fig, ax = plt.subplots(figsize=(8, max(3, 0.28 * len(rows) + 1)))
    ax.barh(range(len(rows)), f1s, color="#4878b0")
    ax.set_yticks(range(len(rows)))
    ax.set_yticklabels([f"{n} (n={s})" for n, _, s in rows], fontsize=7)
    ax.set_xlim(0, 1)
    ax.set_xlabel("F1")
    ax.set_title(f"{title}  (micro F1 {report.micro_f1:.3f}, macro F1 {report.macro_f1:.3f})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def comparison_figure(
    report_a: EvalReport,
    report_b: EvalReport,
    result: McNemarResult,
    path: str | Path,
    name_a: str = "A",
    name_b: str = "B",
):
    metrics = ["micro_f1", "macro_f1", "subset_accuracy"]
    labels = ["micro F1", "macro F1", "subset acc"]
    va = [getattr(report_a, m) for m in metrics]
    vb = [getattr(report_b, m) for m in metrics]
    x = range(len(metrics))
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([i - 0.18 for i in x], va, width=0.36, label=name_a, color="#4878b0")
    ax.bar([i + 0.18 for i in x], vb, width=0.36, label=name_b, color="#d1605e")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1)
    ax.legend()
    ax.set_title(f"McNemar b={result.b} c={result.c} stat={result.statistic:.3f} p={result.p_value:.4g}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
