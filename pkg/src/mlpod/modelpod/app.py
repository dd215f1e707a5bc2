"""Model pod HTTP surface: registry, jobs, edge packaging."""

from __future__ import annotations

import io
import json
import os
import tempfile
import zipfile
from dataclasses import asdict
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, Request, Response, UploadFile
from pydantic import BaseModel

from .. import edgepack
from ..authpod.core import service_claims_token
from ..datapod.client import DatapodClient
from ..httpauth import bearer_claims
from .jobs import JobManager
from .registry import ModelRegistry, ModelpodError

_STATUS = {
    "scope-denied": 403,
    "not-found": 404,
    "invalid-manifest": 422,
    "limit-exceeded": 429,
}


class JobRequest(BaseModel):
    model: dict  # {name, version|"latest"}
    input: str


def make_input_fetcher(datapod_url: str | None, signing_key: bytes):
    """Input refs are local directories or datapod object ids of zipped series."""

    def fetch(input_ref: str) -> Path:
        if os.path.isdir(input_ref):
            return Path(input_ref)
        if datapod_url is None:
            raise FileNotFoundError(f"input not found: {input_ref}")
        token = service_claims_token(signing_key, "modelpod", {"data:read"})
        client = DatapodClient(datapod_url, token)
        try:
            blob = client.get_object(input_ref)
        except Exception as exc:
            raise FileNotFoundError(f"input not found: {input_ref} ({exc})") from None
        workdir = Path(tempfile.mkdtemp(prefix="mlpod-job-"))
        with zipfile.ZipFile(io.BytesIO(blob)) as zf:
            for name in zf.namelist():
                target = workdir / Path(name).name
                target.write_bytes(zf.read(name))
        return workdir

    return fetch


def create_app(
    registry: ModelRegistry,
    jobs: JobManager,
    signing_key: bytes,
    edge_key: bytes,
) -> FastAPI:
    app = FastAPI(title="modelpod")
    app.state.registry = registry
    app.state.jobs = jobs

    def translate(exc: ModelpodError) -> HTTPException:
        return HTTPException(_STATUS.get(exc.code, 400), detail={"error": exc.code, "detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/models")
    async def register_model(
        request: Request,
        manifest: str = Form(...),
        artifact: UploadFile = File(None),
    ):
        claims = bearer_claims(request, signing_key, None)
        blob = await artifact.read() if artifact is not None else b""
        try:
            record = registry.register(json.loads(manifest), blob, claims)
        except ModelpodError as exc:
            raise translate(exc)
        return record.to_dict()

    @app.get("/models/{name}/{selector}")
    def get_model(name: str, selector: str, request: Request):
        bearer_claims(request, signing_key, None)
        try:
            return registry.resolve(name, selector).to_dict()
        except ModelpodError as exc:
            raise translate(exc)

    @app.post("/jobs")
    def submit_job(body: JobRequest, request: Request):
        claims = bearer_claims(request, signing_key, None)
        try:
            job_id = jobs.submit(
                body.model["name"], str(body.model.get("version", "latest")), body.input, claims
            )
        except ModelpodError as exc:
            raise translate(exc)
        return {"id": job_id, "state": "QUEUED"}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str, request: Request):
        claims = bearer_claims(request, signing_key, None)
        try:
            job = jobs.get(job_id, claims)
        except ModelpodError as exc:
            raise translate(exc)
        return asdict(job)

    @app.post("/models/{name}/{selector}/package")
    def package_model(name: str, selector: str, request: Request):
        claims = bearer_claims(request, signing_key, "model:dispatch")
        if "model:dispatch" not in claims.scopes:
            raise HTTPException(403, detail={"error": "scope-denied"})
        try:
            record = registry.resolve(name, selector)
        except ModelpodError as exc:
            raise translate(exc)
        blob = edgepack.package(record.manifest.to_dict(), edge_key)
        return Response(content=blob, media_type="application/octet-stream")

    return app
