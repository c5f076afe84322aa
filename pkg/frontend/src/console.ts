/** Operator-console state machine.
 *
 * Owns the most recent SessionReport and the submit flow. The console never
 * computes risk itself: gauges re-render from whatever the server last said.
 * Duplicate submissions are absorbed: the server answers 409 for a sequence
 * that is no longer pending, and the console just refreshes.
 */

import { ApiError, AuditApi, StaleSequenceError } from "./api.js";
import type { InterpretationValues, SessionReport } from "./types.js";

export interface ConsoleState {
  report: SessionReport | null;
  retrievedConfirmed: boolean;
  busy: boolean;
  error: string | null;
  escalateArmed: boolean;
}

export type Listener = (state: ConsoleState) => void;

export class ConsoleController {
  private state: ConsoleState = {
    report: null,
    retrievedConfirmed: false,
    busy: false,
    error: null,
    escalateArmed: false,
  };
  private listeners: Listener[] = [];

  constructor(
    private readonly api: AuditApi,
    private sessionId: string | null = null,
  ) {}

  getState(): ConsoleState {
    return this.state;
  }

  onChange(fn: Listener): void {
    this.listeners.push(fn);
  }

  private update(patch: Partial<ConsoleState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  /** Retry affordance: re-read state, mutate nothing. */
  async refresh(): Promise<void> {
    if (!this.sessionId) return;
    try {
      const report = await this.api.getStatus(this.sessionId);
      this.update({ report, error: null });
    } catch (err) {
      this.update({ error: describe(err) });
    }
  }

  async connect(sessionId: string): Promise<void> {
    this.sessionId = sessionId;
    this.update({ retrievedConfirmed: false, escalateArmed: false });
    await this.refresh();
  }

  async create(config: unknown): Promise<void> {
    this.update({ busy: true });
    try {
      const report = await this.api.createSession(config as never);
      this.sessionId = report.session_id;
      this.update({ report, error: null, busy: false, retrievedConfirmed: false });
    } catch (err) {
      this.update({ error: describe(err), busy: false });
    }
  }

  /** Operator confirms the named card is physically in hand. */
  confirmRetrieved(): void {
    if (this.state.report?.status === "open") {
      this.update({ retrievedConfirmed: true });
    }
  }

  /** Client-side range check for generic assorter entries. */
  validate(values: InterpretationValues): string | null {
    const report = this.state.report;
    if (!report) return "no session";
    for (const a of report.assertions) {
      if (a.state !== "running") continue;
      const v = values[a.id];
      if (v === undefined || v === "") return `missing entry for ${a.id}`;
      if (typeof v === "number") {
        if (Number.isNaN(v) || v < 0 || v > a.upper_bound) {
          return `value for ${a.id} must be between 0 and ${a.upper_bound}`;
        }
      }
    }
    return null;
  }

  async submit(values: InterpretationValues): Promise<void> {
    const report = this.state.report;
    if (!this.sessionId || !report || !report.pending || this.state.busy) return;
    const problem = this.validate(values);
    if (problem) {
      this.update({ error: problem });
      return;
    }
    this.update({ busy: true });
    const sequence = report.pending.sequence;
    try {
      const next = await this.api.recordInterpretation(this.sessionId, sequence, values);
      this.update({
        report: next,
        error: null,
        busy: false,
        retrievedConfirmed: false,
      });
    } catch (err) {
      if (err instanceof StaleSequenceError) {
        // a duplicate submit landed after the first one was recorded
        this.update({ busy: false, retrievedConfirmed: false });
        await this.refresh();
        return;
      }
      this.update({ error: describe(err), busy: false });
    }
  }

  /** Two-step escalation: first call arms, second call commits. */
  async escalate(): Promise<void> {
    if (!this.sessionId) return;
    if (!this.state.escalateArmed) {
      this.update({ escalateArmed: true });
      return;
    }
    try {
      const report = await this.api.escalate(this.sessionId);
      this.update({ report, escalateArmed: false, error: null });
    } catch (err) {
      this.update({ error: describe(err), escalateArmed: false });
    }
  }

  disarmEscalate(): void {
    this.update({ escalateArmed: false });
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return err.message;
  return String(err);
}
