/** Thin typed client for the audit-service endpoints. No statistics live
 * here: every number the console shows comes back in a SessionReport. */

import type {
  InterpretationValues,
  PendingDraw,
  SessionConfigWire,
  SessionReport,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`${status}: ${detail}`);
  }
}

export class StaleSequenceError extends ApiError {}

type FetchLike = typeof fetch;

export class AuditApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await res.json().catch(() => ({}));
    if (!res.ok) {
      const detail =
        typeof payload === "object" && payload !== null && "detail" in payload
          ? String((payload as { detail: unknown }).detail)
          : res.statusText;
      if (res.status === 409 && detail.includes("sequence")) {
        throw new StaleSequenceError(res.status, detail);
      }
      throw new ApiError(res.status, detail);
    }
    return payload as T;
  }

  createSession(config: SessionConfigWire): Promise<SessionReport> {
    return this.request("POST", "/sessions", config);
  }

  getStatus(sessionId: string): Promise<SessionReport> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  nextDraw(sessionId: string): Promise<PendingDraw> {
    return this.request("POST", `/sessions/${sessionId}/draw`);
  }

  recordInterpretation(
    sessionId: string,
    sequence: number,
    values: InterpretationValues,
  ): Promise<SessionReport> {
    return this.request("POST", `/sessions/${sessionId}/interpretations`, {
      sequence,
      values,
    });
  }

  escalate(sessionId: string): Promise<SessionReport> {
    return this.request("POST", `/sessions/${sessionId}/escalate`);
  }
}
