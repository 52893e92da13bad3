/** Typed client for the prediction service. The UI talks to the service
 * through this module only; the base URL is configurable and nothing about
 * the model (features, ranges, labels, metrics) is known until
 * `modelInfo()` answers. */

export interface FeatureSpec {
  name: string;
  kind: "numeric" | "binary" | "ordinal";
  unit: string;
  min: number;
  max: number;
  aliases: string[];
}

export interface SchemaInfo {
  version: number;
  label_name: string;
  positive_string: string;
  negative_string: string;
  positive_label_meaning: string;
  features: FeatureSpec[];
}

export interface ModelInfo {
  model_version: string;
  model_kind: string;
  members: string[];
  features: string[];
  schema: SchemaInfo;
  labels: { positive: string; negative: string };
  metrics: Record<string, unknown> | null;
  training_meta: Record<string, unknown>;
}

export interface Vote {
  member: string;
  label: string;
  p_positive: number;
}

export interface Prediction {
  label: string;
  p_positive: number;
  votes: Vote[];
  warnings: string[];
  model_version: string;
}

export interface SweepPoint {
  value: number | string;
  prediction?: Prediction;
  error?: string;
  fields?: string[];
}

export interface WhatIfResponse {
  feature: string;
  model_version: string;
  points: SweepPoint[];
}

/** Service-reported failure: HTTP status plus the offending field names
 * from the error body (status 0 = network-level, service unreachable). */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
    readonly fields: string[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

async function parseOrThrow<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let message = `service error (HTTP ${resp.status})`;
  let fields: string[] = [];
  try {
    const body = (await resp.json()) as { error?: string; fields?: string[] };
    if (typeof body.error === "string") message = body.error;
    if (Array.isArray(body.fields)) fields = body.fields;
  } catch {
    /* non-JSON error body: keep the generic message */
  }
  throw new ApiError(resp.status, message, fields);
}

export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl =
      fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(`${this.base}${path}`, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    return parseOrThrow<T>(resp);
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  modelInfo(): Promise<ModelInfo> {
    return this.request("/model/info");
  }

  predict(record: Record<string, number | boolean>): Promise<Prediction> {
    return this.request("/predict", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(record),
    });
  }

  whatif(
    base: Record<string, number | boolean>,
    feature: string,
    values: number[],
  ): Promise<WhatIfResponse> {
    return this.request("/whatif", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ base, feature, values }),
    });
  }
}
