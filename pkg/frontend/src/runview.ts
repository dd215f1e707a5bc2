/** Pure reduction of the run event log into the view model.
 *
 * Rendering is a function of the reduced state only: feeding the same events
 * (in any batch split, in order) always yields the same view.
 */

import type { RunEvent, RunStateName } from "./types.js";

export interface StepView {
  id: string;
  state: string;
  detail: string;
}

export interface RunView {
  run: RunStateName;
  /** Steps in first-appearance (plan) order. */
  steps: StepView[];
  /** Sequence number of the last applied event; resume long-polls from here. */
  lastSeq: number;
  /** done steps / total steps; 0 when no steps are known yet. */
  progress: number;
}

export function emptyView(stepOrder: string[] = []): RunView {
  return {
    run: "CREATED",
    steps: stepOrder.map((id) => ({ id, state: "PENDING", detail: "" })),
    lastSeq: -1,
    progress: 0,
  };
}

/** Apply a batch of ordered events; already-seen sequence numbers are skipped. */
export function applyEvents(view: RunView, events: RunEvent[]): RunView {
  const steps = view.steps.map((s) => ({ ...s }));
  let run = view.run;
  let lastSeq = view.lastSeq;
  for (const ev of events) {
    if (ev.seq <= lastSeq) continue;
    lastSeq = ev.seq;
    if (ev.kind === "run") {
      run = ev.state as RunStateName;
    } else if (ev.step !== null) {
      let step = steps.find((s) => s.id === ev.step);
      if (!step) {
        step = { id: ev.step, state: "PENDING", detail: "" };
        steps.push(step);
      }
      step.state = ev.state;
      if (ev.detail) step.detail = ev.detail;
    }
  }
  const done = steps.filter((s) => s.state === "DONE").length;
  return {
    run,
    steps,
    lastSeq,
    progress: steps.length === 0 ? 0 : done / steps.length,
  };
}

export function reduceEvents(events: RunEvent[], stepOrder: string[] = []): RunView {
  return applyEvents(emptyView(stepOrder), events);
}

/** Ordered (stepId, state) transitions, for rendering a step timeline. */
export function stepTransitions(events: RunEvent[]): Array<[string, string]> {
  return events
    .filter((e) => e.kind === "step" && e.step !== null)
    .map((e) => [e.step as string, e.state]);
}

const STEP_BADGES: Record<string, string> = {
  PENDING: "pending",
  WAITING_EDGE: "waiting",
  RUNNING: "running",
  DONE: "done",
  FAILED: "failed",
};

export function renderRunView(view: RunView): string {
  const rows = view.steps
    .map((s) => {
      const cls = STEP_BADGES[s.state] ?? "pending";
      const detail = s.detail ? ` — ${escapeHtml(s.detail)}` : "";
      return `<li class="step step-${cls}"><span class="step-id">${escapeHtml(s.id)}</span> <span class="step-state">${escapeHtml(s.state)}</span>${detail}</li>`;
    })
    .join("");
  const pct = Math.round(view.progress * 100);
  return (
    `<div class="run run-${view.run.toLowerCase()}">` +
    `<div class="run-state">${view.run}</div>` +
    `<progress max="100" value="${pct}"></progress>` +
    `<ol class="steps">${rows}</ol>` +
    `</div>`
  );
}

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
