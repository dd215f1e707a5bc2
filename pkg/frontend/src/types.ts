/** Wire types for the logicpod HTTP API. */

export type RunStateName = "CREATED" | "RUNNING" | "COMPLETED" | "FAILED";

export type StepStateName =
  | "PENDING"
  | "WAITING_EDGE"
  | "RUNNING"
  | "DONE"
  | "FAILED";

export interface RunEvent {
  seq: number;
  ts: number;
  kind: "run" | "step";
  state: string;
  step: string | null;
  detail: string;
}

export interface StepSnapshot {
  state: StepStateName;
  started_at: number | null;
  ended_at: number | null;
  detail: string;
  env: "cloud" | "edge";
  model_version: number | null;
}

export interface RunSnapshot {
  run_id: string;
  pipeline_id: string;
  state: RunStateName;
  steps: Record<string, StepSnapshot>;
}

export interface TraceEntry {
  step: string;
  duration: number | null;
  env: string;
  model_version: number | null;
}

export interface SimilarSlice {
  anchor_slice_index: number;
  patient_slice_index: number;
  similarity: number;
  anchor_image_ref: string | null;
}

export interface DiagnosisReport {
  run_id: string;
  patient_pseudo_id?: string;
  probability?: number;
  label?: "positive" | "negative";
  pipeline_trace: TraceEntry[];
  warning?: string;
  anchor_id?: string;
  anchor_label?: string;
  anchor_confidence?: number;
  similar_slices?: SimilarSlice[];
  explanation_text?: string;
}

export interface ServiceEntry {
  url: string;
  healthy: boolean;
}
