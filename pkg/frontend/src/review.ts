import type { BatchRecord, OntologyInfo, ReviewFlag, ReviewRow } from "./types";

/**
 * Client-side review state: rows in upload order plus user flags. Corrections
 * live only in the browser and leave via the download; there is no
 * write-back endpoint.
 */
export class ReviewStore {
  private rows: ReviewRow[] = [];
  private validLabels = new Set<string>();

  setOntology(ont: OntologyInfo): void {
    this.validLabels = new Set(ont.diagnoses.map((d) => d.name));
  }

  loadBatch(records: BatchRecord[]): void {
    this.rows = records.map((response, index) => ({
      index,
      reportId: response.report_id ?? String(index + 1),
      partId: response.part_id ?? "WHOLE",
      input: response.input ?? "",
      response,
      flag: { kind: "none" } as ReviewFlag,
    }));
  }

  loadSingle(record: BatchRecord): void {
    this.loadBatch([record]);
  }

  all(): readonly ReviewRow[] {
    return this.rows;
  }

  accept(index: number): void {
    this.setFlag(index, { kind: "accepted" });
  }

  flagForReview(index: number): void {
    this.setFlag(index, { kind: "flagged" });
  }

  /** Records a corrected label set; labels must exist in the ontology. */
  correct(index: number, labels: string[]): void {
    const unknown = labels.filter((l) => !this.validLabels.has(l));
    if (unknown.length > 0) {
      throw new Error(`unknown labels: ${unknown.join(", ")}`);
    }
    this.setFlag(index, { kind: "corrected", labels: [...labels].sort() });
  }

  private setFlag(index: number, flag: ReviewFlag): void {
    const row = this.rows[index];
    if (!row) throw new Error(`no row at index ${index}`);
    row.flag = flag;
  }
}

/** Serializes all rows, including flags and corrections, as pretty JSON. */
export function serializeResults(rows: readonly ReviewRow[]): string {
  return JSON.stringify(
    rows.map((r) => ({
      report_id: r.reportId,
      part_id: r.partId,
      input: r.input,
      prediction: r.response,
      flag: r.flag,
    })),
    null,
    2,
  );
}

/** Inverse of serializeResults; restores rows with their flags intact. */
export function parseResults(json: string): ReviewRow[] {
  const raw = JSON.parse(json) as {
    report_id: string;
    part_id: string;
    input: string;
    prediction: BatchRecord;
    flag: ReviewFlag;
  }[];
  return raw.map((r, index) => ({
    index,
    reportId: r.report_id,
    partId: r.part_id,
    input: r.input,
    response: r.prediction,
    flag: r.flag,
  }));
}
