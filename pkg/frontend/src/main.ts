/** Console bootstrap: wires the controller to the static DOM skeleton.
 * Event handlers are delegated from stable containers so re-rendering never
 * drops listeners. */

import { AuditApi } from "./api.js";
import { ConsoleController } from "./console.js";
import { renderAll } from "./render.js";
import type { InterpretationValues } from "./types.js";

export interface ConsoleHandle {
  controller: ConsoleController;
  api: AuditApi;
}

export function collectEntries(doc: Document): InterpretationValues {
  const values: InterpretationValues = {};
  const inputs = doc.querySelectorAll<HTMLElement>("[data-assertion]");
  inputs.forEach((node) => {
    const id = node.dataset.assertion;
    if (!id || !("value" in node)) return;
    if (node.dataset.kind === "generic") {
      const raw = (node as HTMLInputElement).value;
      values[id] = raw === "" ? "" : Number(raw);
    } else if (node.dataset.kind === "plurality") {
      values[id] = (node as HTMLSelectElement).value;
    }
  });
  return values;
}

const DISPOSE = Symbol.for("audit-console-dispose");

export function initConsole(
  doc: Document,
  apiBase: string,
  fetchFn: typeof fetch = fetch,
): ConsoleHandle {
  const api = new AuditApi(apiBase, fetchFn);
  const controller = new ConsoleController(api);
  controller.onChange((state) => renderAll(doc, state));

  // one live console per document: drop any previous wiring
  const prev = (doc as never as Record<symbol, () => void>)[DISPOSE];
  if (prev) prev();

  const onClick = (event: Event) => {
    const target = event.target as HTMLElement | null;
    if (!target) return;
    switch (target.id) {
      case "connect-btn": {
        const input = doc.getElementById("session-id-input") as HTMLInputElement;
        if (input?.value) void controller.connect(input.value.trim());
        break;
      }
      case "create-btn": {
        const box = doc.getElementById("config-json") as HTMLTextAreaElement;
        try {
          void controller.create(JSON.parse(box.value));
        } catch {
          box.classList.add("invalid");
        }
        break;
      }
      case "retrieved-btn":
        controller.confirmRetrieved();
        break;
      case "submit-btn":
        void controller.submit(collectEntries(doc));
        break;
      case "retry-btn":
        void controller.refresh();
        break;
      case "refresh-btn":
        void controller.refresh();
        break;
      case "escalate-btn":
        void controller.escalate();
        break;
      case "escalate-cancel-btn":
        controller.disarmEscalate();
        break;
    }
  };
  doc.addEventListener("click", onClick);
  (doc as never as Record<symbol, () => void>)[DISPOSE] = () =>
    doc.removeEventListener("click", onClick);

  renderAll(doc, controller.getState());
  return { controller, api };
}

// Browser entry point; tests import initConsole directly instead.
if (typeof window !== "undefined" && typeof document !== "undefined" &&
    document.getElementById("audit-console-root")) {
  const params = new URLSearchParams(window.location.search);
  const base = params.get("api") ?? "";
  const handle = initConsole(document, base);
  const sessionId = params.get("session");
  if (sessionId) void handle.controller.connect(sessionId);
}
