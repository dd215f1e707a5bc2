"""Encrypted, signed edge packages.

Byte layout: 4-byte big-endian header length | header JSON | 12-byte nonce |
AES-256-GCM ciphertext of the canonical manifest bytes | 32-byte HMAC-SHA256
over everything before it. The signature is checked before any decryption.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import time

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .common import canonical_json

FORMAT_VERSION = 1
_SIG_LEN = 32
_NONCE_LEN = 12


class PackageError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code


def _enc_key(key: bytes) -> bytes:
    return hashlib.sha256(key + b"mlpod-edge-enc").digest()


def _sig_key(key: bytes) -> bytes:
    return hashlib.sha256(key + b"mlpod-edge-sig").digest()


def package(manifest: dict, key: bytes, now: float | None = None) -> bytes:
    header = {
        "format_version": FORMAT_VERSION,
        "model_name": manifest.get("name", ""),
        "model_version": manifest.get("version", ""),
        "created_at": int(time.time() if now is None else now),
    }
    header_bytes = canonical_json(header)
    nonce = os.urandom(_NONCE_LEN)
    ciphertext = AESGCM(_enc_key(key)).encrypt(nonce, canonical_json(manifest), header_bytes)
    payload = len(header_bytes).to_bytes(4, "big") + header_bytes + nonce + ciphertext
    sig = hmac.new(_sig_key(key), payload, hashlib.sha256).digest()
    return payload + sig


def validate_package(blob: bytes, key: bytes) -> dict:
    """Verify signature, then decrypt; returns the manifest dict.

    Raises PackageError with code bad-signature | unsupported-version |
    decrypt-failure.
    """
    if len(blob) < 4 + _NONCE_LEN + _SIG_LEN:
        raise PackageError("bad-signature", "package too short")
    payload, sig = blob[:-_SIG_LEN], blob[-_SIG_LEN:]
    expected = hmac.new(_sig_key(key), payload, hashlib.sha256).digest()
    if not hmac.compare_digest(expected, sig):
        raise PackageError("bad-signature")
    header_len = int.from_bytes(payload[:4], "big")
    if 4 + header_len + _NONCE_LEN > len(payload):
        raise PackageError("bad-signature", "inconsistent header length")
    header_bytes = payload[4 : 4 + header_len]
    try:
        header = json.loads(header_bytes)
    except ValueError:
        raise PackageError("bad-signature", "unparseable header") from None
    if header.get("format_version") != FORMAT_VERSION:
        raise PackageError("unsupported-version", str(header.get("format_version")))
    nonce = payload[4 + header_len : 4 + header_len + _NONCE_LEN]
    ciphertext = payload[4 + header_len + _NONCE_LEN :]
    try:
        plaintext = AESGCM(_enc_key(key)).decrypt(nonce, ciphertext, header_bytes)
    except InvalidTag:
        raise PackageError("decrypt-failure") from None
    return json.loads(plaintext)
