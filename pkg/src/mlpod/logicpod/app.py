"""Logic pod HTTP surface: pipelines, runs, events, reports, edge protocol."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel

from ..httpauth import bearer_claims
from ..ml2.lang import Ml2CompileError, Ml2Error
from .engine import LogicpodError, PipelineStore, RunEngine

_STATUS = {
    "not-found": 404,
    "missing-input": 422,
    "validation-failed": 422,
    "run-not-completed": 409,
    "config-error": 500,
}


class RunRequest(BaseModel):
    pipeline_id: str
    inputs: dict[str, str] = {}


class ClaimRequest(BaseModel):
    run_id: str


class CompleteRequest(BaseModel):
    run_id: str
    step_id: str
    outputs: dict[str, str] | None = None
    failures: list[str] = []


def create_app(engine: RunEngine, signing_key: bytes) -> FastAPI:
    app = FastAPI(title="logicpod")
    app.state.engine = engine

    def authed(request: Request):
        return bearer_claims(request, signing_key, "app:access")

    def translate(exc: LogicpodError) -> HTTPException:
        return HTTPException(
            _STATUS.get(exc.code, 400),
            detail={"error": exc.code, "detail": str(exc), "diagnostics": exc.diagnostics},
        )

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/pipelines")
    async def register_pipeline(request: Request):
        authed(request)
        body = await request.body()
        registry = {name: s["url"] for name, s in engine.discover_services().items()}
        try:
            pipeline_id = engine.pipelines.register(body, registry)
        except Ml2CompileError as exc:
            raise HTTPException(422, detail={"error": "cycle-detected", "steps": exc.step_ids})
        except Ml2Error as exc:
            raise HTTPException(
                422,
                detail={
                    "error": "ml2-error",
                    "detail": exc.message,
                    "line": exc.line,
                    "column": exc.column,
                },
            )
        except LogicpodError as exc:
            raise translate(exc)
        return {"pipeline_id": pipeline_id}

    @app.post("/runs")
    def start_run(body: RunRequest, request: Request):
        claims = authed(request)
        try:
            run_id = engine.start_run(body.pipeline_id, body.inputs, claims)
        except LogicpodError as exc:
            raise translate(exc)
        return {"run_id": run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str, request: Request):
        authed(request)
        try:
            return engine.snapshot(run_id)
        except LogicpodError as exc:
            raise translate(exc)

    @app.get("/runs/{run_id}/events")
    def get_events(run_id: str, request: Request, after: int = -1, wait: float = 0.0):
        authed(request)
        try:
            events = engine.stream_events(run_id, after, timeout=min(wait, 25.0))
        except LogicpodError as exc:
            raise translate(exc)
        return {"events": events}

    @app.get("/runs/{run_id}/report")
    def get_report(run_id: str, request: Request):
        authed(request)
        try:
            return engine.render_report(run_id)
        except LogicpodError as exc:
            raise translate(exc)

    @app.get("/services")
    def services(request: Request):
        authed(request)
        return engine.discover_services()

    @app.post("/edge/claim")
    def edge_claim(body: ClaimRequest, request: Request):
        authed(request)
        item = engine.claim_work(body.run_id)
        return {"work": item}

    @app.post("/edge/complete")
    def edge_complete(body: CompleteRequest, request: Request):
        authed(request)
        try:
            engine.complete_work(body.run_id, body.step_id, body.outputs, body.failures)
        except LogicpodError as exc:
            raise translate(exc)
        return {"ok": True}

    if engine.config.static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/app", StaticFiles(directory=engine.config.static_dir, html=True), name="app")

    return app
