/** Wire types mirrored from the prediction service. */

export interface SeverityHit {
  label: string;
  probability: number;
}

export interface DiagnosisHit {
  label: string;
  probability: number;
  severity: string;
}

export interface Importance {
  token: string;
  score: number;
}

export interface PredictResponse {
  input: string;
  severities: SeverityHit[];
  diagnoses: DiagnosisHit[];
  no_prediction: boolean;
  importances: Importance[];
  bundle_version: string;
}

/** One line of the NDJSON batch response: a prediction or a row error. */
export interface BatchRecord extends Partial<PredictResponse> {
  report_id?: string;
  part_id?: string;
  error?: string;
}

export interface OntologyInfo {
  version: string;
  checksum: string;
  severities: { code: string; display_name: string }[];
  diagnoses: { name: string; severity: string }[];
}

export interface HealthInfo {
  status: string;
  model_loaded: boolean;
}

/** User review state attached to a row; corrections are label sets. */
export type ReviewFlag =
  | { kind: "none" }
  | { kind: "accepted" }
  | { kind: "flagged" }
  | { kind: "corrected"; labels: string[] };

export interface ReviewRow {
  index: number;
  reportId: string;
  partId: string;
  input: string;
  response: BatchRecord;
  flag: ReviewFlag;
}
