"""Auth pod HTTP surface: POST /token, POST /introspect."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel

from ..httpauth import bearer_claims
from .core import AuthError, ClientRegistry, TokenService


class TokenRequest(BaseModel):
    client_id: str
    client_secret: str
    scope: str = ""
    ttl: int = 3600


class IntrospectRequest(BaseModel):
    token: str


def create_app(service: TokenService) -> FastAPI:
    app = FastAPI(title="authpod")
    app.state.tokens = service

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/token")
    def token(req: TokenRequest):
        scopes = set(req.scope.split()) if req.scope else set()
        try:
            tok = service.issue_token(req.client_id, req.client_secret, scopes, req.ttl)
        except AuthError as exc:
            raise HTTPException(400, detail={"error": exc.code})
        return {"access_token": tok, "token_type": "Bearer", "expires_in": req.ttl}

    @app.post("/introspect")
    def introspect(req: IntrospectRequest, request: Request):
        bearer_claims(request, service.key, "model:admin")
        return service.introspect(req.token)

    return app


def create_app_from_env() -> FastAPI:
    import os

    from ..common import SIGNING_KEY_ENV, load_key

    registry = ClientRegistry.from_file(os.environ["MLPOD_CLIENTS_FILE"])
    return create_app(TokenService(load_key(SIGNING_KEY_ENV), registry))
