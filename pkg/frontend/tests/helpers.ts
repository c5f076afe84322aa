import { readFileSync } from "node:fs";
import { join } from "node:path";

import type { SessionReport } from "../src/types.js";

/** Load the real index.html body into the jsdom document. */
export function mountDom(): void {
  const html = readFileSync(join(process.cwd(), "index.html"), "utf8");
  const body = /<body[^>]*>([\s\S]*)<\/body>/.exec(html)![1];
  document.body.innerHTML = body.replace(/<script[\s\S]*?<\/script>/g, "");
}

export function freshReport(overrides: Partial<SessionReport> = {}): SessionReport {
  return {
    schema: "audit-session-report/1",
    session_id: "abc123",
    status: "open",
    risk_limit: 0.05,
    population_size: 1000,
    sampling: "without_replacement",
    draws_taken: 0,
    pending: { sequence: 1, index: 734 },
    assertions: [
      {
        id: "mayor",
        assorter_kind: "plurality_pair",
        upper_bound: 1,
        draws: 0,
        p_value: 1.0,
        measured_risk: 1.0,
        state: "running",
      } as never,
    ],
    history: [],
    ...overrides,
  };
}

export function settle(ms = 10): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

type Responder = (
  method: string,
  path: string,
  body: unknown,
) => { status: number; payload: unknown };

/** A scripted fetch stand-in; records every request it serves. */
export function fakeFetch(responder: Responder) {
  const calls: { method: string; path: string; body: unknown }[] = [];
  const fn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, path, body });
    const { status, payload } = responder(method, path, body);
    return {
      ok: status >= 200 && status < 300,
      status,
      statusText: String(status),
      json: async () => payload,
    } as unknown as Response;
  }) as typeof fetch;
  return { fn, calls };
}
