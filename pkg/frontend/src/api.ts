/** Thin typed client for the four service routes.
 *
 * Errors keep the response body verbatim so the UI can render the failing
 * field exactly as the service reported it.
 */

import {
  Bounds, HealthResponse, InferRequest, InferResponse, ModelMeta,
} from "./types.js";

export class ApiError extends Error {
  status: number;
  /** Parsed `detail` from the error body, rendered verbatim by the UI. */
  detail: unknown;

  constructor(status: number, detail: unknown) {
    super(`request failed with status ${status}`);
    this.status = status;
    this.detail = detail;
  }
}

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  baseUrl: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl: FetchLike = fetch.bind(globalThis)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    let body: unknown = null;
    try {
      body = await response.json();
    } catch {
      body = null;
    }
    if (!response.ok) {
      const detail =
        body && typeof body === "object" && "detail" in (body as object)
          ? (body as { detail: unknown }).detail
          : body;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("/api/health");
  }

  models(): Promise<ModelMeta[]> {
    return this.request("/api/models");
  }

  bounds(model?: string): Promise<Bounds> {
    const query = model ? `?model=${encodeURIComponent(model)}` : "";
    return this.request(`/api/bounds${query}`);
  }

  infer(request: InferRequest): Promise<InferResponse> {
    return this.request("/api/infer", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
  }
}
