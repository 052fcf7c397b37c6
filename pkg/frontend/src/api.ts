import type {
  Edit,
  ExplanationDoc,
  InstanceDetail,
  InstanceListResponse,
  ModelInfo,
  WhatIfResponse,
} from "./types";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

async function parseOrThrow<T>(resp: Response): Promise<T> {
  const body = await resp.json().catch(() => null);
  if (!resp.ok) {
    const message =
      body && typeof body.error === "string" ? body.error : `HTTP ${resp.status}`;
    throw new ApiError(message, resp.status);
  }
  return body as T;
}

export interface ExplainRequest {
  instance_id?: string;
  text?: string;
  window?: number[][];
  explainer: string;
  seed: number;
  neighbourhood_size?: number;
  top_k?: number;
}

/** Thin typed client over the service endpoints. */
export class ApiClient {
  constructor(readonly base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async instances(split?: string, limit?: number): Promise<InstanceListResponse> {
    const params = new URLSearchParams();
    if (split) params.set("split", split);
    if (limit) params.set("limit", String(limit));
    const qs = params.size ? `?${params}` : "";
    return parseOrThrow(await fetch(this.url(`/api/instances${qs}`)));
  }

  async instance(id: string): Promise<InstanceDetail> {
    return parseOrThrow(await fetch(this.url(`/api/instances/${id}`)));
  }

  async modelInfo(): Promise<ModelInfo> {
    return parseOrThrow(await fetch(this.url("/api/model-info")));
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    return parseOrThrow(
      await fetch(this.url(path), {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
      }),
    );
  }

  async predict(payload: { instance_id?: string; text?: string; window?: number[][] }) {
    return this.post<{ prediction: number }>("/api/predict", payload);
  }

  async explain(payload: ExplainRequest): Promise<ExplanationDoc> {
    return this.post<ExplanationDoc>("/api/explain", payload);
  }

  async whatIf(instanceId: string, edits: Edit[]): Promise<WhatIfResponse> {
    return this.post<WhatIfResponse>("/api/whatif", {
      instance_id: instanceId,
      edits,
    });
  }
}
