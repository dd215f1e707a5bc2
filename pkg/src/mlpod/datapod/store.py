"""Token-gated object store with immutable-versioned anchor sets.

Directory-per-store layout; commits are atomic renames so readers always see
a complete old or new version, never a mix.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from ..anchors.serialize import validate_anchor_set_dict
from ..authpod.core import Claims

_ID_RE = re.compile(r"^[A-Za-z0-9._-]{1,128}$")


class DatapodError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code


@dataclass
class StoredObject:
    id: str
    bytes: bytes
    content_hash: str
    media_type: str
    created_at: int


def _require(claims: Claims, scope: str) -> None:
    if scope not in claims.scopes:
        raise DatapodError("scope-denied", f"requires {scope}")


class ObjectStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        (self.root / "objects").mkdir(parents=True, exist_ok=True)
        (self.root / "anchorsets").mkdir(parents=True, exist_ok=True)
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._locks_guard = threading.Lock()

    def _lock(self, key: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks[key]

    # -- opaque objects ------------------------------------------------

    def put_object(self, obj_id: str, data: bytes, media_type: str, claims: Claims) -> dict:
        _require(claims, "data:write")
        if not _ID_RE.match(obj_id):
            raise DatapodError("invalid-id", f"id {obj_id!r} not allowed")
        limit = claims.limits.max_input_bytes
        if limit is not None and len(data) > limit:
            raise DatapodError("payload-too-large", f"{len(data)} > {limit}")
        content_hash = hashlib.sha256(data).hexdigest()
        meta = {
            "media_type": media_type,
            "content_hash": content_hash,
            "created_at": int(time.time()),
        }
        with self._lock(f"obj:{obj_id}"):
            tmp = self.root / "objects" / f".{obj_id}.tmp"
            tmp.write_bytes(data)
            (self.root / "objects" / f".{obj_id}.meta.tmp").write_text(json.dumps(meta))
            os.replace(self.root / "objects" / f".{obj_id}.meta.tmp",
                       self.root / "objects" / f"{obj_id}.meta.json")
            os.replace(tmp, self.root / "objects" / obj_id)
        return {"id": obj_id, "content_hash": content_hash}

    def get_object(self, obj_id: str, claims: Claims) -> StoredObject:
        _require(claims, "data:read")
        if not _ID_RE.match(obj_id):
            raise DatapodError("invalid-id", f"id {obj_id!r} not allowed")
        path = self.root / "objects" / obj_id
        meta_path = self.root / "objects" / f"{obj_id}.meta.json"
        if not path.exists():
            raise DatapodError("not-found", obj_id)
        data = path.read_bytes()
        meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
        return StoredObject(
            id=obj_id,
            bytes=data,
            content_hash=hashlib.sha256(data).hexdigest(),
            media_type=meta.get("media_type", "application/octet-stream"),
            created_at=meta.get("created_at", 0),
        )

    # -- versioned anchor sets -----------------------------------------

    def put_anchor_set(self, name: str, doc: dict, claims: Claims) -> int:
        _require(claims, "data:write")
        if not _ID_RE.match(name):
            raise DatapodError("invalid-id", f"name {name!r} not allowed")
        issues = self._validate_doc(doc)
        if issues:
            raise DatapodError("validation-error", "; ".join(issues))
        with self._lock(f"aset:{name}"):
            directory = self.root / "anchorsets" / name
            directory.mkdir(parents=True, exist_ok=True)
            version = max(self._versions(directory), default=0) + 1
            tmp = directory / f".{version}.tmp"
            tmp.write_text(json.dumps(doc, sort_keys=True))
            os.replace(tmp, directory / f"{version}.json")
        return version

    def get_anchor_set(self, name: str, selector: str | int, claims: Claims) -> tuple[int, dict]:
        _require(claims, "data:read")
        directory = self.root / "anchorsets" / name
        versions = self._versions(directory) if directory.exists() else []
        if not versions:
            raise DatapodError("not-found", f"anchor set {name!r}")
        if selector == "latest":
            version = max(versions)
        else:
            version = int(selector)
            if version not in versions:
                raise DatapodError("not-found", f"{name} version {version}")
        return version, json.loads((directory / f"{version}.json").read_text())

    @staticmethod
    def _versions(directory: Path) -> list[int]:
        return [int(p.stem) for p in directory.glob("*.json") if p.stem.isdigit()]

    @staticmethod
    def _validate_doc(doc: dict) -> list[str]:
        issues = []
        provenance = doc.get("provenance")
        if not isinstance(provenance, dict):
            issues.append("provenance: missing")
        else:
            for key in ("model_name", "model_version", "created_at"):
                if not provenance.get(key):
                    issues.append(f"provenance.{key}: empty")
        issues.extend(validate_anchor_set_dict(doc))
        return issues
