import type {
  ChangesPayload,
  CreatedModel,
  ExplanationView,
  FeatureEdit,
  GeParams,
  InstancesPayload,
  RenderPayload,
  WhatIfResult,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public path?: string,
  ) {
    super(message);
  }
}

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

function query(params: Record<string, string | undefined>): string {
  const pairs = Object.entries(params).filter(([, v]) => v !== undefined && v !== "");
  if (!pairs.length) return "";
  return "?" + pairs.map(([k, v]) => `${k}=${encodeURIComponent(v as string)}`).join("&");
}

/** Thin typed wrapper over the service routes; all knowledge of URLs lives here. */
export class ApiClient {
  constructor(
    private base: string,
    private fetchFn: FetchFn = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.base + path, init);
    if (!resp.ok) {
      let message = `HTTP ${resp.status}`;
      let errPath: string | undefined;
      try {
        const body = (await resp.json()) as { error?: string; path?: string };
        if (body.error) message = body.error;
        errPath = body.path;
      } catch {
        /* non-JSON error body: keep the status message */
      }
      throw new ApiError(resp.status, message, errPath);
    }
    return (await resp.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  createModel(body: {
    forest?: unknown;
    train?: unknown;
    dataset_csv: string;
    schema: Record<string, unknown>;
  }): Promise<CreatedModel> {
    return this.post("/models", body);
  }

  getSummary(modelId: string): Promise<CreatedModel> {
    return this.request(`/models/${modelId}`);
  }

  getInstances(modelId: string, split = "test"): Promise<InstancesPayload> {
    return this.request(`/models/${modelId}/instances${query({ split })}`);
  }

  getRules(modelId: string, params: GeParams = {}): Promise<ExplanationView> {
    return this.request(`/models/${modelId}/rules${query({ ...params })}`);
  }

  renderGlobal(modelId: string, params: GeParams = {}): Promise<RenderPayload> {
    return this.request(
      `/models/${modelId}/render${query({ view: "global", regions: "true", ...params })}`,
    );
  }

  renderLocal(modelId: string, instance: number[], kind: "local" | "changes" = "local",
              params: GeParams = {}): Promise<RenderPayload> {
    return this.request(
      `/models/${modelId}/render${query({
        view: kind,
        regions: "true",
        instance: instance.join(","),
        ...params,
      })}`,
    );
  }

  explainLocal(modelId: string, instance: number[]): Promise<ExplanationView> {
    return this.post(`/models/${modelId}/explain/local`, { instance });
  }

  explainChanges(modelId: string, instance: number[]): Promise<ChangesPayload> {
    return this.post(`/models/${modelId}/explain/changes`, { instance });
  }

  whatifTree(modelId: string, instance: number[], treeId: number): Promise<WhatIfResult> {
    return this.post(`/models/${modelId}/whatif`, { instance, tree_id: treeId });
  }

  whatifEdits(modelId: string, instance: number[], edits: FeatureEdit[]): Promise<WhatIfResult> {
    return this.post(`/models/${modelId}/whatif`, { instance, edits });
  }

  deleteModel(modelId: string): Promise<unknown> {
    return this.fetchFn(`${this.base}/models/${modelId}`, { method: "DELETE" });
  }
}
