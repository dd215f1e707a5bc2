"""Shared plumbing: base64url, canonical JSON, ULIDs, key loading."""

from __future__ import annotations

import base64
import json
import os
import secrets
import time

SIGNING_KEY_ENV = "MLPOD_SIGNING_KEY"
EDGE_KEY_ENV = "MLPOD_EDGE_KEY"

_ULID_ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"


def b64url_encode(data: bytes) -> str:
    return base64.urlsafe_b64encode(data).rstrip(b"=").decode("ascii")


def b64url_decode(text: str) -> bytes:
    pad = -len(text) % 4
    return base64.urlsafe_b64decode(text + "=" * pad)


def canonical_json(obj) -> bytes:
    """Stable byte form for hashing and signing."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def new_ulid(now: float | None = None) -> str:
    """26-char ULID: 48-bit millisecond timestamp + 80 random bits, Crockford base32."""
    ms = int((time.time() if now is None else now) * 1000)
    value = (ms << 80) | secrets.randbits(80)
    chars = []
    for _ in range(26):
        chars.append(_ULID_ALPHABET[value & 31])
        value >>= 5
    return "".join(reversed(chars))


def load_key(env_var: str) -> bytes:
    """Read a base64 key (>= 32 bytes decoded) from the environment."""
    raw = os.environ.get(env_var)
    if not raw:
        raise RuntimeError(f"{env_var} is not set")
    key = base64.b64decode(raw)
    if len(key) < 32:
        raise RuntimeError(f"{env_var} must decode to at least 32 bytes")
    return key
