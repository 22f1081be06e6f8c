import { highlightSpans } from "./highlight";
import type { BatchRecord, Importance, ReviewRow } from "./types";

export function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const pct = (p: number): string => `${(p * 100).toFixed(1)}%`;

export function severityTable(severities: { label: string; probability: number }[]): string {
  if (severities.length === 0) {
    return `<p class="empty">no severity above threshold (no prediction)</p>`;
  }
  const rows = severities
    .map((s) => `<tr><td>${escapeHtml(s.label)}</td><td>${pct(s.probability)}</td></tr>`)
    .join("");
  return `<table class="severities"><thead><tr><th>Severity</th><th>Probability</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function diagnosisTable(
  diagnoses: { label: string; probability: number; severity: string }[],
): string {
  if (diagnoses.length === 0) {
    return `<p class="empty">no diagnosis above threshold</p>`;
  }
  const rows = diagnoses
    .map(
      (d) =>
        `<tr><td>${escapeHtml(d.label)}</td><td>${escapeHtml(d.severity)}</td><td>${pct(d.probability)}</td></tr>`,
    )
    .join("");
  return `<table class="diagnoses"><thead><tr><th>Diagnosis</th><th>Severity</th><th>Probability</th></tr></thead><tbody>${rows}</tbody></table>`;
}

/** Input text with scored tokens wrapped in marks; opacity tracks |score|. */
export function highlightHtml(text: string, importances: Importance[]): string {
  return highlightSpans(text, importances)
    .map((span) => {
      const safe = escapeHtml(span.text);
      if (span.score === null) return safe;
      const cls = span.score >= 0 ? "imp-pos" : "imp-neg";
      return `<mark class="${cls}" style="--imp:${span.opacity.toFixed(3)}" title="${span.score.toFixed(4)}">${safe}</mark>`;
    })
    .join("");
}

function flagBadge(row: ReviewRow): string {
  switch (row.flag.kind) {
    case "accepted":
      return `<span class="badge ok">accepted</span>`;
    case "flagged":
      return `<span class="badge warn">flagged</span>`;
    case "corrected":
      return `<span class="badge edit">corrected: ${escapeHtml(row.flag.labels.join("; "))}</span>`;
    default:
      return "";
  }
}

function recordSummary(rec: BatchRecord): string {
  if (rec.error) return `<span class="badge err">error: ${escapeHtml(rec.error)}</span>`;
  const sev = (rec.severities ?? []).map((s) => s.label).join(", ") || "–";
  const diag = (rec.diagnoses ?? []).map((d) => d.label).join(", ") || "–";
  return `<span class="sev">${escapeHtml(sev)}</span> / <span class="diag">${escapeHtml(diag)}</span>`;
}

/** One table row per batch record, in upload order. */
export function batchTable(rows: readonly ReviewRow[]): string {
  const body = rows
    .map(
      (r) =>
        `<tr data-index="${r.index}"><td>${escapeHtml(r.reportId)}</td><td>${escapeHtml(
          r.partId,
        )}</td><td class="input">${escapeHtml(r.input)}</td><td>${recordSummary(
          r.response,
        )}</td><td>${flagBadge(r)}</td></tr>`,
    )
    .join("");
  return `<table class="batch"><thead><tr><th>Report</th><th>Part</th><th>Input</th><th>Prediction</th><th>Review</th></tr></thead><tbody>${body}</tbody></table>`;
}

export function errorBanner(message: string): string {
  return `<div class="banner error" role="alert">${escapeHtml(message)} <button data-action="retry">Retry</button></div>`;
}
