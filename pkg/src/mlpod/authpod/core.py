"""Signed, scoped access tokens (client-credentials only, HMAC-SHA256).

Tokens are three dot-separated base64url segments: header, claims, signature.
Verification is stateless; every pod holding the shared signing key can verify
locally.
"""

from __future__ import annotations

import hashlib
import hmac
import ipaddress
import json
import time
from dataclasses import dataclass, field

from ..common import b64url_decode, b64url_encode

ALL_SCOPES = frozenset(
    {
        "data:read",
        "data:write",
        "model:execute",
        "model:admin",
        "model:dispatch",
        "app:access",
    }
)

_HEADER = {"alg": "HS256", "typ": "MLPOD"}


class AuthError(Exception):
    """Token issuance or verification failure with a stable error code."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code


@dataclass(frozen=True)
class Limits:
    max_jobs: int | None = None
    max_input_bytes: int | None = None


@dataclass(frozen=True)
class Claims:
    """Validated claims. Only `verify_token` constructs these."""

    sub: str
    scopes: frozenset[str]
    iat: int
    nbf: int
    exp: int
    net: tuple[str, ...] | None = None
    limits: Limits = field(default_factory=Limits)

    def to_dict(self) -> dict:
        out = {
            "sub": self.sub,
            "scopes": sorted(self.scopes),
            "iat": self.iat,
            "nbf": self.nbf,
            "exp": self.exp,
        }
        if self.net is not None:
            out["net"] = list(self.net)
        limits = {}
        if self.limits.max_jobs is not None:
            limits["max_jobs"] = self.limits.max_jobs
        if self.limits.max_input_bytes is not None:
            limits["max_input_bytes"] = self.limits.max_input_bytes
        if limits:
            out["limits"] = limits
        return out


def _claims_from_payload(payload: dict) -> Claims:
    limits = payload.get("limits") or {}
    net = payload.get("net")
    return Claims(
        sub=payload["sub"],
        scopes=frozenset(payload.get("scopes", [])),
        iat=int(payload["iat"]),
        nbf=int(payload["nbf"]),
        exp=int(payload["exp"]),
        net=tuple(net) if net is not None else None,
        limits=Limits(
            max_jobs=limits.get("max_jobs"),
            max_input_bytes=limits.get("max_input_bytes"),
        ),
    )


def _sign(key: bytes, signing_input: bytes) -> bytes:
    return hmac.new(key, signing_input, hashlib.sha256).digest()


def encode_token(key: bytes, payload: dict) -> str:
    head = b64url_encode(json.dumps(_HEADER, separators=(",", ":")).encode())
    body = b64url_encode(json.dumps(payload, sort_keys=True, separators=(",", ":")).encode())
    signing_input = f"{head}.{body}".encode("ascii")
    sig = b64url_encode(_sign(key, signing_input))
    return f"{head}.{body}.{sig}"


def verify_token(
    key: bytes,
    token: str,
    required_scope: str | None = None,
    now: float | None = None,
    peer_addr: str | None = None,
) -> Claims:
    """Check signature, validity window, scope and network restriction.

    Raises AuthError with code bad-signature | expired | not-yet-valid |
    missing-scope | network-restricted.
    """
    now = time.time() if now is None else now
    parts = token.split(".")
    if len(parts) != 3:
        raise AuthError("bad-signature", "token must have three segments")
    head, body, sig = parts
    try:
        expected = _sign(key, f"{head}.{body}".encode("ascii"))
        given = b64url_decode(sig)
    except Exception:
        raise AuthError("bad-signature", "undecodable segment") from None
    if not hmac.compare_digest(expected, given):
        raise AuthError("bad-signature")
    try:
        payload = json.loads(b64url_decode(body))
        claims = _claims_from_payload(payload)
    except Exception:
        raise AuthError("bad-signature", "unparseable claims") from None
    if now < claims.nbf:
        raise AuthError("not-yet-valid")
    if now >= claims.exp:
        raise AuthError("expired")
    if required_scope is not None and required_scope not in claims.scopes:
        raise AuthError("missing-scope", f"requires {required_scope}")
    if claims.net is not None:
        if peer_addr is None or not _addr_in_networks(peer_addr, claims.net):
            raise AuthError("network-restricted")
    return claims


def _addr_in_networks(addr: str, cidrs: tuple[str, ...]) -> bool:
    try:
        ip = ipaddress.ip_address(addr)
    except ValueError:
        return False
    for cidr in cidrs:
        try:
            if ip in ipaddress.ip_network(cidr, strict=False):
                return True
        except ValueError:
            continue
    return False


@dataclass(frozen=True)
class Client:
    client_id: str
    client_secret: str
    allowed_scopes: frozenset[str]
    net: tuple[str, ...] | None = None
    limits: Limits = field(default_factory=Limits)


class ClientRegistry:
    """Immutable registry of machine clients, loaded once at startup."""

    def __init__(self, clients: list[Client]):
        self._clients = {c.client_id: c for c in clients}

    @classmethod
    def from_file(cls, path: str) -> "ClientRegistry":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        clients = []
        for entry in data["clients"]:
            limits = entry.get("limits") or {}
            clients.append(
                Client(
                    client_id=entry["client_id"],
                    client_secret=entry["client_secret"],
                    allowed_scopes=frozenset(entry["allowed_scopes"]),
                    net=tuple(entry["net"]) if entry.get("net") else None,
                    limits=Limits(
                        max_jobs=limits.get("max_jobs"),
                        max_input_bytes=limits.get("max_input_bytes"),
                    ),
                )
            )
        return cls(clients)

    def get(self, client_id: str) -> Client | None:
        return self._clients.get(client_id)


class TokenService:
    """Issues and verifies tokens for a client registry and signing key."""

    def __init__(self, key: bytes, registry: ClientRegistry, clock=time.time):
        self.key = key
        self.registry = registry
        self.clock = clock

    def issue_token(
        self,
        client_id: str,
        client_secret: str,
        requested_scopes: set[str],
        ttl_seconds: int,
    ) -> str:
        if ttl_seconds <= 0:
            raise AuthError("invalid_request", "ttl must be positive")
        client = self.registry.get(client_id)
        if client is None or not hmac.compare_digest(
            client.client_secret.encode(), client_secret.encode()
        ):
            raise AuthError("invalid_client")
        bad = set(requested_scopes) - ALL_SCOPES
        if bad or not set(requested_scopes) <= client.allowed_scopes:
            raise AuthError("invalid_scope")
        now = int(self.clock())
        claims = Claims(
            sub=client_id,
            scopes=frozenset(requested_scopes),
            iat=now,
            nbf=now,
            exp=now + int(ttl_seconds),
            net=client.net,
            limits=client.limits,
        )
        return encode_token(self.key, claims.to_dict())

    def verify_token(
        self,
        token: str,
        required_scope: str | None = None,
        now: float | None = None,
        peer_addr: str | None = None,
    ) -> Claims:
        return verify_token(
            self.key,
            token,
            required_scope=required_scope,
            now=self.clock() if now is None else now,
            peer_addr=peer_addr,
        )

    def introspect(self, token: str) -> dict:
        try:
            claims = self.verify_token(token)
        except AuthError:
            return {"active": False, "claims": None}
        return {"active": True, "claims": claims.to_dict()}


def service_claims_token(key: bytes, sub: str, scopes: set[str], ttl_seconds: int = 3600) -> str:
    """Self-issued token for pod-to-pod calls; pods share the signing key."""
    now = int(time.time())
    claims = Claims(sub=sub, scopes=frozenset(scopes), iat=now, nbf=now, exp=now + ttl_seconds)
    return encode_token(key, claims.to_dict())
