/** Wire types for the audit-service HTTP API (audit-session-report/1). */

export type SessionStatus = "open" | "all_confirmed" | "escalated";

export type AssertionState = "running" | "rejected" | "exhausted";

export interface AssertionReport {
  id: string;
  assorter_kind: "plurality_pair" | "generic_bounded";
  upper_bound: number;
  draws: number;
  p_value: number;
  measured_risk: number;
  state: AssertionState;
}

export interface PendingDraw {
  sequence: number;
  index: number;
}

export interface HistoryEntry {
  sequence: number;
  index: number;
  values: Record<string, string | number>;
}

export interface SessionReport {
  schema: string;
  session_id: string;
  status: SessionStatus;
  risk_limit: number;
  population_size: number;
  sampling: string;
  draws_taken: number;
  pending: PendingDraw | null;
  assertions: AssertionReport[];
  history: HistoryEntry[];
}

export interface AssertionConfigWire {
  id: string;
  assorter:
    | { kind: "plurality_pair"; winner: string; loser: string }
    | { kind: "generic_bounded"; upper_bound: number };
  test: Record<string, string | number>;
}

export interface SessionConfigWire {
  seed: number;
  population_size: number;
  sampling: "with_replacement" | "without_replacement";
  risk_limit: number;
  assertions: AssertionConfigWire[];
}

export type InterpretationValues = Record<string, string | number>;
