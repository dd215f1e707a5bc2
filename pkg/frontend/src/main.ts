/** Wires the pure view code to the DOM and the logicpod API. */

import { LogicpodClient } from "./api.js";
import { renderPendingReport, renderReport } from "./report.js";
import { applyEvents, emptyView, renderRunView, type RunView } from "./runview.js";
import { stageFiles } from "./upload.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

let client: LogicpodClient | null = null;
let stagedDir = "";
let watching = false;

function connect(): LogicpodClient {
  const base = el<HTMLInputElement>("base-url").value.trim();
  const token = el<HTMLInputElement>("token").value.trim();
  client = new LogicpodClient(base, token);
  return client;
}

async function onStage(): Promise<void> {
  const input = el<HTMLInputElement>("files");
  const files = [];
  for (const file of Array.from(input.files ?? [])) {
    files.push({ name: file.name, bytes: new Uint8Array(await file.arrayBuffer()) });
  }
  const result = stageFiles(files);
  el("staging-summary").textContent = result.summary;
  el("flagged").innerHTML = result.flagged
    .map((f) => `<li class="flagged-file">${f.name} is not a DICOM file</li>`)
    .join("");
  el<HTMLButtonElement>("start").disabled = !result.canSubmit;
  stagedDir = el<HTMLInputElement>("series-dir").value.trim();
}

async function watchRun(runId: string): Promise<void> {
  if (watching) return;
  watching = true;
  const api = connect();
  let view: RunView = emptyView();
  el("run-id").textContent = runId;
  while (view.run !== "COMPLETED" && view.run !== "FAILED") {
    try {
      const batch = await api.getEvents(runId, view.lastSeq, 10);
      view = applyEvents(view, batch.events);
      el("run-view").innerHTML = renderRunView(view);
    } catch {
      // transient disconnect: retry from lastSeq, no transitions lost
      await new Promise((resolve) => setTimeout(resolve, 1000));
    }
  }
  if (view.run === "COMPLETED") {
    const report = await api.getReport(runId);
    const services = await api.getServices().catch(() => ({}) as Record<string, { url: string }>);
    el("report").innerHTML = renderReport(report, services["datapod"]?.url);
  } else {
    el("report").innerHTML = renderPendingReport("FAILED");
  }
  watching = false;
}

async function onStart(): Promise<void> {
  const api = connect();
  const xml = el<HTMLTextAreaElement>("pipeline-xml").value;
  el("report").innerHTML = renderPendingReport("starting");
  const { pipeline_id } = await api.registerPipeline(xml);
  const { run_id } = await api.startRun(pipeline_id, { scan: stagedDir });
  void watchRun(run_id);
}

function main(): void {
  el("stage").addEventListener("click", () => void onStage());
  el("start").addEventListener("click", () => void onStart());
  el("watch").addEventListener("click", () => {
    const runId = el<HTMLInputElement>("existing-run").value.trim();
    if (runId) void watchRun(runId);
  });
}

document.addEventListener("DOMContentLoaded", main);
