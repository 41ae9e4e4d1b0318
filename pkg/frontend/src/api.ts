/** Thin client for the engine's HTTP JSON API. */

import type {
  AnalysisResponse,
  DatasetSchema,
  DatasetSummary,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const text = await resp.text();
  let body: unknown = null;
  try {
    body = text ? JSON.parse(text) : null;
  } catch {
    /* non-JSON error body */
  }
  if (!resp.ok) {
    const detail =
      body && typeof body === "object" && "error" in body
        ? String((body as { error: unknown }).error)
        : `${resp.status} ${resp.statusText}`;
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

export class EngineClient {
  constructor(public baseUrl: string = "") {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  async listDatasets(): Promise<DatasetSummary[]> {
    const body = await request<{ datasets: DatasetSummary[] }>(this.url("/datasets"));
    return body.datasets;
  }

  async datasetSchema(name: string): Promise<DatasetSchema> {
    return request<DatasetSchema>(this.url(`/datasets/${encodeURIComponent(name)}/schema`));
  }

  async uploadCsv(name: string, csv: string): Promise<{ name: string; rows: number }> {
    return request(this.url(`/datasets?name=${encodeURIComponent(name)}`), {
      method: "POST",
      headers: { "content-type": "text/csv" },
      body: csv,
    });
  }

  async analyze(requestBody: Record<string, unknown>): Promise<AnalysisResponse> {
    return request<AnalysisResponse>(this.url("/analyze"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(requestBody),
    });
  }

  async incrementalStart(body: Record<string, unknown>): Promise<string> {
    const out = await request<{ session: string }>(this.url("/analyze/incremental/start"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    return out.session;
  }

  async incrementalFeed(session: string, count: number): Promise<{ total: number }> {
    return request(this.url("/analyze/incremental/feed"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session, count }),
    });
  }

  async incrementalSnapshot(session: string): Promise<AnalysisResponse> {
    return request<AnalysisResponse>(this.url("/analyze/incremental/snapshot"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ session }),
    });
  }
}
