import type { BatchRecord, HealthInfo, OntologyInfo, PredictResponse } from "./types";

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin typed client for the prediction service. The UI performs no
 * classification itself; every displayed number comes from these calls.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (u, i) => fetch(u, i),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/+$/, "") + path;
  }

  private async checked(path: string, init?: RequestInit): Promise<Response> {
    let res: Response;
    try {
      res = await this.fetchImpl(this.url(path), init);
    } catch (e) {
      throw new ApiError(`service unreachable: ${String(e)}`);
    }
    if (!res.ok) {
      let detail = "";
      try {
        detail = ((await res.json()) as { error?: string }).error ?? "";
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(detail || `request failed with status ${res.status}`, res.status);
    }
    return res;
  }

  async health(): Promise<HealthInfo> {
    return (await this.checked("/healthz")).json();
  }

  async ontology(): Promise<OntologyInfo> {
    return (await this.checked("/api/ontology")).json();
  }

  async predict(text: string): Promise<PredictResponse> {
    const res = await this.checked("/api/predict", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ text }),
    });
    return res.json();
  }

  /** Uploads a CSV or JSON-lines body; resolves to records in input order. */
  async batch(body: string): Promise<BatchRecord[]> {
    const res = await this.checked("/api/batch", {
      method: "POST",
      headers: { "Content-Type": "text/plain; charset=utf-8" },
      body,
    });
    return parseNdjson(await res.text());
  }
}

/** Parses an NDJSON payload, preserving line order; blank lines skipped. */
export function parseNdjson(text: string): BatchRecord[] {
  const out: BatchRecord[] = [];
  for (const line of text.split("\n")) {
    if (!line.trim()) continue;
    out.push(JSON.parse(line) as BatchRecord);
  }
  return out;
}
