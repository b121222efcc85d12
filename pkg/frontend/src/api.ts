// Typed client for the QA service. The UI never computes over geometries
// or triples; everything it shows comes out of these response bodies.

import type {
  ApiErrorBody,
  DescriptiveResult,
  FactualResult,
  FeatureCollection,
  HealthInfo,
  SparqlResults,
} from "./types";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly stage: string | null;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.code = body.code;
    this.status = status;
    this.stage = body.stage ?? null;
  }
}

export interface DescriptiveOptions {
  useMapImage?: boolean;
  useSearch?: boolean;
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: "internal", message: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthInfo> {
    return this.request<HealthInfo>("/health");
  }

  sparql(query: string): Promise<SparqlResults> {
    return this.request<SparqlResults>("/sparql", {
      method: "POST",
      body: JSON.stringify({ query }),
    });
  }

  qaFactual(question: string, signal?: AbortSignal): Promise<FactualResult> {
    return this.request<FactualResult>("/qa/factual", {
      method: "POST",
      body: JSON.stringify({ question }),
      signal,
    });
  }

  qaDescriptive(
    question: string,
    options: DescriptiveOptions = {},
    signal?: AbortSignal,
  ): Promise<DescriptiveResult> {
    return this.request<DescriptiveResult>("/qa/descriptive", {
      method: "POST",
      body: JSON.stringify({
        question,
        use_map_image: options.useMapImage ?? false,
        use_search: options.useSearch ?? false,
      }),
      signal,
    });
  }

  features(params: { municipality?: string; year?: number; type?: string }): Promise<FeatureCollection> {
    const search = new URLSearchParams();
    if (params.municipality) search.set("municipality", params.municipality);
    if (params.year !== undefined) search.set("year", String(params.year));
    if (params.type) search.set("type", params.type);
    const suffix = search.toString() ? `?${search.toString()}` : "";
    return this.request<FeatureCollection>(`/features${suffix}`);
  }

  schemaCatalog(): Promise<unknown> {
    return this.request<unknown>("/schema");
  }

  tileUrl(municipality: string, year: number): string {
    return `${this.baseUrl}/tiles/${encodeURIComponent(municipality)}/${year}`;
  }
}
