/** DOM rendering for the operator console. Every figure shown is copied
 * verbatim from the latest SessionReport; formatting only, no math beyond
 * percent display of the server's measured risk. */

import type { ConsoleState } from "./console.js";
import type { AssertionReport, SessionReport } from "./types.js";

export function riskPercent(risk: number): string {
  return `${(risk * 100).toPrecision(3)}%`;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  text?: string,
  className?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (text !== undefined) node.textContent = text;
  if (className) node.className = className;
  return node;
}

export function renderMeta(container: HTMLElement, report: SessionReport): void {
  container.textContent =
    `Session ${report.session_id} — ${report.sampling}, ` +
    `${report.population_size} cards, risk limit ${riskPercent(report.risk_limit)}, ` +
    `${report.draws_taken} draws recorded`;
}

export function renderBanner(container: HTMLElement, report: SessionReport): void {
  container.innerHTML = "";
  container.dataset.status = report.status;
  if (report.status === "all_confirmed") {
    container.appendChild(
      el(container.ownerDocument, "div",
         "Audit complete: every assertion confirmed. Sampling can stop.",
         "banner banner-confirmed"),
    );
  } else if (report.status === "escalated") {
    container.appendChild(
      el(container.ownerDocument, "div",
         "Audit escalated to a full hand count. This session is read-only.",
         "banner banner-escalated"),
    );
  }
}

export function renderPending(
  container: HTMLElement,
  state: ConsoleState,
): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  const report = state.report;
  if (!report || report.status !== "open" || !report.pending) return;
  const instruction = el(
    doc, "p",
    `Retrieve ballot #${report.pending.index} (draw ${report.pending.sequence})`,
  );
  instruction.id = "pending-instruction";
  container.appendChild(instruction);
  const btn = el(doc, "button", "Card retrieved");
  btn.id = "retrieved-btn";
  btn.disabled = state.retrievedConfirmed;
  container.appendChild(btn);
}

export function renderEntryForm(
  container: HTMLElement,
  state: ConsoleState,
): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  const report = state.report;
  if (!report || report.status !== "open" || !report.pending) return;
  const enabled = state.retrievedConfirmed && !state.busy;
  for (const a of report.assertions) {
    if (a.state !== "running") continue;
    const row = el(doc, "div", undefined, "entry-row");
    const label = el(doc, "label", `${a.id}: `);
    row.appendChild(label);
    if (a.assorter_kind === "generic_bounded") {
      const input = el(doc, "input");
      input.type = "number";
      input.step = "any";
      input.min = "0";
      input.max = String(a.upper_bound);
      input.dataset.assertion = a.id;
      input.dataset.kind = "generic";
      input.disabled = !enabled;
      row.appendChild(input);
    } else {
      const select = el(doc, "select");
      select.dataset.assertion = a.id;
      select.dataset.kind = "plurality";
      for (const choice of ["winner", "loser", "other", "invalid"]) {
        const opt = el(doc, "option", `vote for ${choice}`);
        opt.value = choice;
        select.appendChild(opt);
      }
      select.disabled = !enabled;
      row.appendChild(select);
    }
    container.appendChild(row);
  }
  const submit = el(doc, "button", state.busy ? "Recording…" : "Record interpretation");
  submit.id = "submit-btn";
  submit.disabled = !enabled;
  container.appendChild(submit);
}

export function renderGauges(container: HTMLElement, report: SessionReport): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  for (const a of report.assertions) {
    container.appendChild(gaugeRow(doc, a, report.risk_limit));
  }
}

function gaugeRow(doc: Document, a: AssertionReport, alpha: number): HTMLElement {
  const row = el(doc, "div", undefined, `gauge gauge-${a.state}`);
  row.dataset.assertion = a.id;
  row.dataset.risk = String(a.measured_risk);
  row.dataset.state = a.state;
  const name = el(doc, "span", a.id, "gauge-name");
  const risk = el(
    doc, "span",
    `measured risk ${riskPercent(a.measured_risk)} (stop at ≤ ${riskPercent(alpha)})`,
    "gauge-risk",
  );
  const status = el(doc, "span", `${a.state}, ${a.draws} draws`, "gauge-state");
  row.append(name, risk, status);
  return row;
}

export function renderHistory(container: HTMLElement, report: SessionReport): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  if (report.history.length === 0) return;
  const table = el(doc, "table", undefined, "history");
  const head = el(doc, "tr");
  for (const h of ["draw", "ballot", "entered"]) head.appendChild(el(doc, "th", h));
  table.appendChild(head);
  for (const entry of [...report.history].reverse()) {
    const tr = el(doc, "tr");
    tr.appendChild(el(doc, "td", String(entry.sequence)));
    tr.appendChild(el(doc, "td", `#${entry.index}`));
    tr.appendChild(
      el(doc, "td",
         Object.entries(entry.values).map(([k, v]) => `${k}=${v}`).join(", ")),
    );
    table.appendChild(tr);
  }
  container.appendChild(table);
}

export function renderError(container: HTMLElement, state: ConsoleState): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  if (!state.error) return;
  const box = el(doc, "div", undefined, "error-box");
  box.appendChild(el(doc, "span", state.error, "error-text"));
  const retry = el(doc, "button", "Retry");
  retry.id = "retry-btn";
  box.appendChild(retry);
  container.appendChild(box);
}

export function renderEscalate(container: HTMLElement, state: ConsoleState): void {
  const doc = container.ownerDocument;
  container.innerHTML = "";
  if (!state.report || state.report.status !== "open") return;
  const btn = el(
    doc, "button",
    state.escalateArmed
      ? "Confirm: stop sampling and hand count everything"
      : "Escalate to full hand count…",
  );
  btn.id = "escalate-btn";
  btn.className = state.escalateArmed ? "danger armed" : "danger";
  container.appendChild(btn);
  if (state.escalateArmed) {
    const cancel = el(doc, "button", "Keep auditing");
    cancel.id = "escalate-cancel-btn";
    container.appendChild(cancel);
  }
}

export function renderAll(doc: Document, state: ConsoleState): void {
  const byId = (id: string) => doc.getElementById(id) as HTMLElement | null;
  const report = state.report;
  const connect = byId("connect-panel");
  const session = byId("session-panel");
  if (connect && session) {
    connect.hidden = report !== null;
    session.hidden = report === null;
  }
  if (!report) {
    const err = byId("error-area");
    if (err) renderError(err, state);
    return;
  }
  const meta = byId("session-meta");
  if (meta) renderMeta(meta, report);
  const banner = byId("banner-area");
  if (banner) renderBanner(banner, report);
  const pending = byId("pending-area");
  if (pending) renderPending(pending, state);
  const entry = byId("entry-area");
  if (entry) renderEntryForm(entry, state);
  const gauges = byId("gauge-area");
  if (gauges) renderGauges(gauges, report);
  const history = byId("history-area");
  if (history) renderHistory(history, report);
  const err = byId("error-area");
  if (err) renderError(err, state);
  const esc = byId("escalate-area");
  if (esc) renderEscalate(esc, state);
}
