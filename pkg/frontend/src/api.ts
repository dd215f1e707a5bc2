/** Typed client for the logicpod HTTP API. Only documented endpoints. */

import type { DiagnosisReport, RunEvent, RunSnapshot, ServiceEntry } from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`HTTP ${status}: ${JSON.stringify(body)}`);
  }
}

export class LogicpodClient {
  constructor(
    private baseUrl: string,
    private token: string,
    private fetchFn: typeof fetch = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      ...init,
      headers: {
        authorization: `Bearer ${this.token}`,
        ...(init.headers ?? {}),
      },
    });
    const body = await resp.json().catch(() => null);
    if (!resp.ok) throw new ApiError(resp.status, body);
    return body as T;
  }

  registerPipeline(ml2Xml: string): Promise<{ pipeline_id: string }> {
    return this.request("/pipelines", {
      method: "POST",
      body: ml2Xml,
      headers: { "content-type": "application/xml" },
    });
  }

  startRun(pipelineId: string, inputs: Record<string, string>): Promise<{ run_id: string }> {
    return this.request("/runs", {
      method: "POST",
      body: JSON.stringify({ pipeline_id: pipelineId, inputs }),
      headers: { "content-type": "application/json" },
    });
  }

  getRun(runId: string): Promise<RunSnapshot> {
    return this.request(`/runs/${runId}`);
  }

  /** Long-poll events strictly after `afterSeq`. */
  getEvents(runId: string, afterSeq: number, waitSeconds = 10): Promise<{ events: RunEvent[] }> {
    return this.request(`/runs/${runId}/events?after=${afterSeq}&wait=${waitSeconds}`);
  }

  getReport(runId: string): Promise<DiagnosisReport> {
    return this.request(`/runs/${runId}/report`);
  }

  getServices(): Promise<Record<string, ServiceEntry>> {
    return this.request("/services");
  }
}
