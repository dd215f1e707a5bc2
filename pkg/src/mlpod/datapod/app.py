"""Data pod HTTP surface."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request, Response
from pydantic import BaseModel

from ..httpauth import bearer_claims
from .manifest import DatasetManifest, validate_manifest
from .store import DatapodError, ObjectStore

_STATUS = {
    "scope-denied": 403,
    "not-found": 404,
    "invalid-id": 400,
    "payload-too-large": 413,
    "validation-error": 422,
}


class ManifestBody(BaseModel):
    name: str = ""
    covid_scans: int = 0
    non_covid_scans: int = 0
    covid_slices: int = 0
    non_covid_slices: int = 0
    total_scans: int | None = None


def create_app(store: ObjectStore, key: bytes) -> FastAPI:
    app = FastAPI(title="datapod")
    app.state.store = store

    def claims_for(request: Request, scope: str | None = None):
        return bearer_claims(request, key, scope)

    def translate(exc: DatapodError) -> HTTPException:
        return HTTPException(_STATUS.get(exc.code, 400), detail={"error": exc.code, "detail": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.put("/objects/{obj_id}")
    async def put_object(obj_id: str, request: Request):
        claims = claims_for(request)
        body = await request.body()
        media_type = request.headers.get("content-type", "application/octet-stream")
        try:
            return store.put_object(obj_id, body, media_type, claims)
        except DatapodError as exc:
            raise translate(exc)

    @app.get("/objects/{obj_id}")
    def get_object(obj_id: str, request: Request):
        claims = claims_for(request)
        try:
            obj = store.get_object(obj_id, claims)
        except DatapodError as exc:
            raise translate(exc)
        return Response(
            content=obj.bytes,
            media_type=obj.media_type,
            headers={"x-content-hash": obj.content_hash},
        )

    @app.put("/anchorsets/{name}")
    async def put_anchor_set(name: str, request: Request):
        claims = claims_for(request)
        doc = await request.json()
        try:
            version = store.put_anchor_set(name, doc, claims)
        except DatapodError as exc:
            raise translate(exc)
        return {"name": name, "version": version}

    @app.get("/anchorsets/{name}/{selector}")
    def get_anchor_set(name: str, selector: str, request: Request):
        claims = claims_for(request)
        try:
            version, doc = store.get_anchor_set(name, selector, claims)
        except DatapodError as exc:
            raise translate(exc)
        return {"name": name, "version": version, "document": doc}

    @app.post("/manifests/validate")
    def manifests_validate(body: ManifestBody, request: Request):
        claims_for(request)
        manifest = DatasetManifest(**body.model_dump())
        return validate_manifest(manifest)

    return app
