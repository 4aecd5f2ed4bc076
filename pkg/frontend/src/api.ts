/** Thin typed client for the review service. The UI talks to nothing else. */

import type {
  ApplyRequest,
  ApplyResponse,
  SessionPayload,
  WireAsset,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
  }
}

/** 404 on a session: it never existed or its TTL ran out. */
export class SessionExpiredError extends ApiError {
  constructor(sessionId: string) {
    super(`session ${sessionId} is unknown or expired`, 404);
  }
}

async function parseError(response: Response): Promise<string> {
  try {
    const body = await response.json();
    return typeof body.detail === "string"
      ? body.detail
      : JSON.stringify(body.detail ?? body);
  } catch {
    return response.statusText;
  }
}

export class ApiClient {
  constructor(readonly baseUrl: string, private readonly fetchFn: typeof fetch = fetch) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!response.ok) {
      throw new ApiError(await parseError(response), response.status);
    }
    return (await response.json()) as T;
  }

  async health(): Promise<{ status: string; version: string }> {
    const response = await this.fetchFn(this.baseUrl + "/v1/health");
    if (!response.ok) {
      throw new ApiError(await parseError(response), response.status);
    }
    return await response.json();
  }

  optimize(assets: WireAsset[], context = 3): Promise<SessionPayload> {
    return this.post<SessionPayload>("/v1/optimize", { assets, context });
  }

  async getSession(sessionId: string): Promise<SessionPayload> {
    const response = await this.fetchFn(
      `${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}`,
    );
    if (response.status === 404) {
      throw new SessionExpiredError(sessionId);
    }
    if (!response.ok) {
      throw new ApiError(await parseError(response), response.status);
    }
    return await response.json();
  }

  async apply(sessionId: string, request: ApplyRequest): Promise<ApplyResponse> {
    const response = await this.fetchFn(
      `${this.baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/apply`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
      },
    );
    if (response.status === 404) {
      throw new SessionExpiredError(sessionId);
    }
    if (!response.ok) {
      throw new ApiError(await parseError(response), response.status);
    }
    return await response.json();
  }

  diff(a: string, b: string, context = 3): Promise<{ diff: string; hunks: number }> {
    return this.post("/v1/diff", { a, b, context });
  }

  estimate(totalBytes: number, domOps: number): Promise<Record<string, unknown>> {
    return this.post("/v1/estimate", { total_bytes: totalBytes, dom_ops: domOps });
  }
}
