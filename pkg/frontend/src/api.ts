/** Typed fetch client for the annotation service REST API. */

import type {
  SessionView,
  SubmitResult,
  TagValue,
  TriageView,
} from "./types.js";

/** Injectable so tests can substitute a double for global fetch. */
export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** A non-2xx reply, carrying the service's {code, message, details} body. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly details: Record<string, unknown>;

  constructor(
    status: number,
    code: string,
    message: string,
    details: Record<string, unknown> = {},
  ) {
    super(message);
    this.name = "ApiError";
    this.status = status;
    this.code = code;
    this.details = details;
  }
}

export function isVersionConflict(err: unknown): err is ApiError {
  return err instanceof ApiError && err.code === "version_conflict";
}

export class ApiClient {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, token: string, fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.token = token;
    // Bind: bare `fetch` loses its expected receiver when reassigned.
    this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {
      authorization: `Bearer ${this.token}`,
    };
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["content-type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  healthz(): Promise<{ status: string }> {
    return this.request("GET", "/healthz");
  }

  createSession(qaId: string): Promise<SessionView> {
    return this.request("POST", "/sessions", { qa_id: qaId });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  recordTag(
    sessionId: string,
    index: number,
    tag: TagValue,
    version: number,
  ): Promise<SessionView> {
    return this.request(
      "PUT",
      `/sessions/${encodeURIComponent(sessionId)}/ldps/${index}/tag`,
      { tag, version },
    );
  }

  addMissingLdp(
    sessionId: string,
    text: string,
    version: number,
  ): Promise<SessionView> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/ldps`,
      { text, version },
    );
  }

  submit(sessionId: string, version: number): Promise<SubmitResult> {
    return this.request(
      "POST",
      `/sessions/${encodeURIComponent(sessionId)}/submit`,
      { version },
    );
  }

  triageReport(): Promise<TriageView> {
    return this.request("GET", "/reports/triage");
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `HTTP ${response.status}`;
  let details: Record<string, unknown> = {};
  try {
    const body = (await response.json()) as Record<string, unknown>;
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
    if (body.details && typeof body.details === "object") {
      details = body.details as Record<string, unknown>;
    }
  } catch {
    // Non-JSON error body; keep the HTTP-level placeholders.
  }
  return new ApiError(response.status, code, message, details);
}
