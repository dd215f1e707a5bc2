"""Bearer-token enforcement shared by the pod HTTP apps."""

from __future__ import annotations

from fastapi import HTTPException, Request

from .authpod.core import AuthError, Claims, verify_token

_STATUS = {
    "bad-signature": 401,
    "expired": 401,
    "not-yet-valid": 401,
    "missing-scope": 403,
    "network-restricted": 403,
}


def bearer_claims(request: Request, key: bytes, required_scope: str | None) -> Claims:
    """Verify the Authorization header; raise 401/403 with the token error code."""
    header = request.headers.get("authorization", "")
    if not header.lower().startswith("bearer "):
        raise HTTPException(401, detail={"error": "missing-token"})
    token = header[7:].strip()
    peer = request.client.host if request.client else None
    try:
        return verify_token(key, token, required_scope=required_scope, peer_addr=peer)
    except AuthError as exc:
        code = exc.code if exc.code in _STATUS else "bad-signature"
        status = _STATUS[code]
        if code == "missing-scope":
            raise HTTPException(status, detail={"error": "scope-denied", "scope": required_scope})
        raise HTTPException(status, detail={"error": code})
