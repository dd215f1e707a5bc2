"""Pipeline registration and run orchestration.

Each run appends to its own JSONL event log; the in-memory step-state map is
always reconstructible by replaying that log (used for crash recovery).
"""

from __future__ import annotations

import base64
import hashlib
import json
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..authpod.core import Claims, service_claims_token
from ..common import new_ulid
from ..datapod.client import DatapodClient
from ..modelpod.client import ModelpodClient
from ..ml2.lang import (
    ExecutionPlan,
    Ml2CompileError,
    Ml2Error,
    Ml2Step,
    compile_plan,
    parse_ml2,
    validate,
)
from .config import LogicpodConfig
from .report import build_report


class LogicpodError(Exception):
    def __init__(self, code: str, detail: str = "", diagnostics: list[str] | None = None):
        super().__init__(detail or code)
        self.code = code
        self.diagnostics = diagnostics or []


@dataclass
class StepState:
    state: str = "PENDING"  # PENDING|WAITING_EDGE|RUNNING|DONE|FAILED
    started_at: float | None = None
    ended_at: float | None = None
    detail: str = ""
    env: str = "cloud"
    model_version: int | None = None


@dataclass
class RunState:
    run_id: str
    pipeline_id: str
    state: str = "CREATED"  # CREATED|RUNNING|COMPLETED|FAILED
    steps: dict[str, StepState] = field(default_factory=dict)
    events: list[dict] = field(default_factory=list)
    inputs: dict[str, str] = field(default_factory=dict)
    binding_values: dict[str, object] = field(default_factory=dict)
    step_results: dict[str, dict] = field(default_factory=dict)
    report: dict | None = None


class PipelineStore:
    """Immutable, content-addressed compiled pipelines."""

    def __init__(self):
        self._plans: dict[str, tuple[bytes, ExecutionPlan]] = {}
        self._lock = threading.Lock()

    def register(self, ml2_bytes: bytes, registry: dict[str, str]) -> str:
        pipeline_id = "pl-" + hashlib.sha256(ml2_bytes).hexdigest()[:16]
        with self._lock:
            if pipeline_id in self._plans:
                return pipeline_id
        doc = parse_ml2(ml2_bytes)  # Ml2Error propagates with location
        diags = validate(doc, registry)
        if diags:
            raise LogicpodError("validation-failed", "; ".join(diags), diagnostics=diags)
        plan = compile_plan(doc)  # Ml2CompileError propagates
        with self._lock:
            self._plans[pipeline_id] = (ml2_bytes, plan)
        return pipeline_id

    def get(self, pipeline_id: str) -> ExecutionPlan:
        with self._lock:
            entry = self._plans.get(pipeline_id)
        if entry is None:
            raise LogicpodError("not-found", f"pipeline {pipeline_id!r}")
        return entry[1]


def replay_events(events: list[dict]) -> dict:
    """Rebuild the final run/step state map from an ordered event log."""
    state = {"run": "CREATED", "steps": {}}
    last_seq = -1
    for ev in events:
        if ev["seq"] <= last_seq:
            raise ValueError("event sequence numbers must be strictly increasing")
        last_seq = ev["seq"]
        if ev["kind"] == "run":
            state["run"] = ev["state"]
        else:
            state["steps"][ev["step"]] = ev["state"]
    return state


class RunEngine:
    def __init__(self, config: LogicpodConfig, pipelines: PipelineStore, signing_key: bytes):
        self.config = config
        self.pipelines = pipelines
        self.signing_key = signing_key
        self.runs: dict[str, RunState] = {}
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._edge_items: dict[str, list[dict]] = {}  # run_id -> pending work items
        self.runs_dir = Path(config.root) / "runs"
        self.runs_dir.mkdir(parents=True, exist_ok=True)

    # -- service clients ----------------------------------------------------

    def _token(self, scopes: set[str]) -> str:
        return service_claims_token(self.signing_key, "logicpod", scopes)

    def _modelpod(self) -> ModelpodClient:
        url = self.config.services.get("modelpod")
        if url is None:
            raise LogicpodError("config-error", "no modelpod service configured")
        return ModelpodClient(url, self._token({"model:execute", "model:admin", "model:dispatch"}))

    def _datapod(self) -> DatapodClient | None:
        url = self.config.services.get("datapod")
        if url is None:
            return None
        return DatapodClient(url, self._token({"data:read", "data:write"}))

    # -- events --------------------------------------------------------------

    def _emit(self, run: RunState, kind: str, state: str, step: str | None = None, detail: str = ""):
        with self._cond:
            event = {
                "seq": len(run.events),
                "ts": time.time(),
                "kind": kind,
                "state": state,
                "step": step,
                "detail": detail,
            }
            run.events.append(event)
            if kind == "run":
                run.state = state
            else:
                st = run.steps[step]
                st.state = state
                if detail:
                    st.detail = detail
            with open(self.runs_dir / f"{run.run_id}.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event) + "\n")
            self._cond.notify_all()

    # -- run lifecycle -------------------------------------------------------

    def start_run(self, pipeline_id: str, inputs: dict[str, str], claims: Claims) -> str:
        plan = self.pipelines.get(pipeline_id)
        for inp in plan.document.inputs:
            if inp.required and inp.id not in inputs:
                raise LogicpodError("missing-input", f"required input {inp.id!r} not bound")
        run = RunState(run_id=new_ulid(), pipeline_id=pipeline_id, inputs=dict(inputs))
        for step in plan.document.steps:
            run.steps[step.id] = StepState(env=step.env)
        run.binding_values.update(inputs)
        with self._lock:
            self.runs[run.run_id] = run
        self._emit(run, "run", "CREATED")
        thread = threading.Thread(
            target=self._orchestrate, args=(run, plan), daemon=True, name=f"run-{run.run_id}"
        )
        thread.start()
        return run.run_id

    def get_run(self, run_id: str) -> RunState:
        with self._lock:
            run = self.runs.get(run_id)
        if run is None:
            raise LogicpodError("not-found", f"run {run_id!r}")
        return run

    def snapshot(self, run_id: str) -> dict:
        run = self.get_run(run_id)
        with self._lock:
            return {
                "run_id": run.run_id,
                "pipeline_id": run.pipeline_id,
                "state": run.state,
                "steps": {
                    sid: {
                        "state": st.state,
                        "started_at": st.started_at,
                        "ended_at": st.ended_at,
                        "detail": st.detail,
                        "env": st.env,
                        "model_version": st.model_version,
                    }
                    for sid, st in run.steps.items()
                },
            }

    def stream_events(self, run_id: str, after_seq: int, timeout: float = 0.0) -> list[dict]:
        run = self.get_run(run_id)
        deadline = time.time() + timeout
        with self._cond:
            while True:
                pending = [e for e in run.events if e["seq"] > after_seq]
                if pending or run.state in ("COMPLETED", "FAILED") or time.time() >= deadline:
                    return list(pending)
                self._cond.wait(timeout=max(0.0, deadline - time.time()))

    # -- orchestration -------------------------------------------------------

    def _orchestrate(self, run: RunState, plan: ExecutionPlan) -> None:
        self._emit(run, "run", "RUNNING")
        steps_by_id = {s.id: s for s in plan.document.steps}
        try:
            for stage in plan.stages:
                threads = []
                failures: list[str] = []

                def run_step(step: Ml2Step):
                    try:
                        self._execute_step(run, plan, step)
                    except Exception as exc:
                        failures.append(f"{step.id}: {exc}")
                        run.steps[step.id].ended_at = time.time()
                        self._emit(run, "step", "FAILED", step.id, str(exc))

                for sid in stage:
                    t = threading.Thread(target=run_step, args=(steps_by_id[sid],), daemon=True)
                    threads.append(t)
                    t.start()
                for t in threads:
                    t.join()
                if failures:
                    self._emit(run, "run", "FAILED", detail="; ".join(failures))
                    return
            self._emit(run, "run", "COMPLETED")
        except Exception as exc:
            self._emit(run, "run", "FAILED", detail=str(exc))

    def _execute_step(self, run: RunState, plan: ExecutionPlan, step: Ml2Step) -> None:
        run.steps[step.id].started_at = time.time()
        model = next(m for m in plan.document.models if m.id == step.model)
        if step.env == "edge":
            self._execute_edge_step(run, step, model)
        else:
            self._execute_cloud_step(run, step, model)
        run.steps[step.id].ended_at = time.time()

    def _execute_cloud_step(self, run: RunState, step: Ml2Step, model) -> None:
        self._emit(run, "step", "RUNNING", step.id)
        client = self._modelpod()
        input_ref = ""
        for bind in step.inputs:
            value = run.binding_values.get(bind)
            if isinstance(value, str):
                input_ref = value
                break
        job_id = client.submit_job(model.name, model.version, input_ref)
        job = client.wait_job(job_id, timeout=self.config.edge_timeout_seconds)
        if job["state"] != "SUCCEEDED":
            raise RuntimeError(f"job {job_id} {job['state']}: {job.get('error')}")
        run.steps[step.id].model_version = job.get("model_version")
        run.step_results[step.id] = job["result"]
        for out in step.outputs:
            run.binding_values[out] = {"kind": "inference", "step": step.id}
        self._emit(run, "step", "DONE", step.id, f"model v{job.get('model_version')}")

    def _execute_edge_step(self, run: RunState, step: Ml2Step, model) -> None:
        client = self._modelpod()
        package = client.package_model(model.name, model.version)
        record = client.resolve_model(model.name, model.version)
        run.steps[step.id].model_version = record["version"]
        input_ref = next(
            (run.binding_values[b] for b in step.inputs if isinstance(run.binding_values.get(b), str)),
            "",
        )
        item = {
            "run_id": run.run_id,
            "step_id": step.id,
            "package_b64": base64.b64encode(package).decode("ascii"),
            "input_ref": input_ref,
            "output_ids": list(step.outputs),
            "claimed": False,
            "done": threading.Event(),
            "outputs": None,
            "failures": [],
        }
        with self._lock:
            self._edge_items.setdefault(run.run_id, []).append(item)
        self._emit(run, "step", "WAITING_EDGE", step.id)
        timeout = step.timeout_seconds or self.config.edge_timeout_seconds
        finished = item["done"].wait(timeout=timeout)
        with self._lock:
            items = self._edge_items.get(run.run_id, [])
            if item in items:
                items.remove(item)
        if not finished:
            raise RuntimeError(f"edge step timed out after {timeout} s")
        if item["outputs"] is None:
            raise RuntimeError("edge execution failed: " + "; ".join(item["failures"]))
        for out, obj_id in item["outputs"].items():
            run.binding_values[out] = obj_id
        self._emit(run, "step", "DONE", step.id, "edge outputs uploaded")

    # -- edge agent protocol -------------------------------------------------

    def claim_work(self, run_id: str) -> dict | None:
        with self._lock:
            item = next(
                (i for i in self._edge_items.get(run_id, []) if not i["claimed"]), None
            )
            if item is None:
                return None
            item["claimed"] = True
            claimed = {
                "run_id": item["run_id"],
                "step_id": item["step_id"],
                "package_b64": item["package_b64"],
                "input_ref": item["input_ref"],
                "output_ids": item["output_ids"],
            }
        run = self.get_run(run_id)
        self._emit(run, "step", "RUNNING", claimed["step_id"], "claimed by edge agent")
        return claimed

    def complete_work(
        self, run_id: str, step_id: str, outputs: dict[str, str] | None, failures: list[str]
    ) -> None:
        with self._lock:
            item = next(
                (i for i in self._edge_items.get(run_id, []) if i["step_id"] == step_id), None
            )
        if item is None:
            raise LogicpodError("not-found", f"no pending edge work for run {run_id!r}")
        item["outputs"] = outputs
        item["failures"] = failures
        item["done"].set()

    # -- reporting -----------------------------------------------------------

    def render_report(self, run_id: str) -> dict:
        run = self.get_run(run_id)
        if run.state != "COMPLETED":
            raise LogicpodError("run-not-completed", f"run is {run.state}")
        if run.report is not None:
            return run.report
        plan = self.pipelines.get(run.pipeline_id)
        report = build_report(run, plan, self.config, self._datapod())
        run.report = report
        datapod = self._datapod()
        if datapod is not None:
            try:
                datapod.put_object(
                    f"run-{run.run_id}-report.json",
                    json.dumps(report).encode("utf-8"),
                    "application/json",
                )
            except Exception:
                pass  # report persistence is best-effort; the API response carries it
        return report

    # -- discovery -----------------------------------------------------------

    def discover_services(self) -> dict:
        import httpx

        out = {}
        for name, url in self.config.services.items():
            healthy = False
            try:
                resp = httpx.get(f"{url.rstrip('/')}/healthz", timeout=2.0)
                healthy = resp.status_code == 200
            except Exception:
                healthy = False
            out[name] = {"url": url, "healthy": healthy}
        return out
