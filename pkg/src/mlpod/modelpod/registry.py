"""Versioned model registry; "latest" resolves at call time."""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from ..authpod.core import Claims
from ..modeladapter.stub import ModelManifest


class ModelpodError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(detail or code)
        self.code = code


@dataclass
class ModelRecord:
    name: str
    version: int
    manifest: ModelManifest
    artifact_hash: str
    registered_at: int

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "version": self.version,
            "manifest": self.manifest.to_dict(),
            "artifact_hash": self.artifact_hash,
            "registered_at": self.registered_at,
        }


class ModelRegistry:
    def __init__(self, root: str | Path):
        self.root = Path(root) / "models"
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def register(self, manifest: dict, artifact: bytes, claims: Claims) -> ModelRecord:
        if "model:admin" not in claims.scopes:
            raise ModelpodError("scope-denied", "requires model:admin")
        try:
            parsed = ModelManifest.from_dict({**manifest, "version": "0"})
        except ValueError as exc:
            raise ModelpodError("invalid-manifest", str(exc))
        with self._lock:
            name_dir = self.root / parsed.name
            version = max(self._versions(name_dir), default=0) + 1
            parsed.version = str(version)
            vdir = name_dir / f".{version}.tmp"
            vdir.mkdir(parents=True, exist_ok=True)
            (vdir / "manifest.json").write_text(json.dumps(parsed.to_dict()))
            (vdir / "artifact.bin").write_bytes(artifact)
            record = ModelRecord(
                name=parsed.name,
                version=version,
                manifest=parsed,
                artifact_hash=hashlib.sha256(artifact).hexdigest(),
                registered_at=int(time.time()),
            )
            (vdir / "record.json").write_text(json.dumps(record.to_dict()))
            os.replace(vdir, name_dir / str(version))
        return record

    def resolve(self, name: str, selector: str | int) -> ModelRecord:
        name_dir = self.root / name
        versions = self._versions(name_dir)
        if not versions:
            raise ModelpodError("not-found", f"model {name!r}")
        if selector == "latest":
            version = max(versions)
        else:
            try:
                version = int(selector)
            except (TypeError, ValueError):
                raise ModelpodError("not-found", f"bad selector {selector!r}")
            if version not in versions:
                raise ModelpodError("not-found", f"{name} version {version}")
        data = json.loads((name_dir / str(version) / "record.json").read_text())
        return ModelRecord(
            name=data["name"],
            version=data["version"],
            manifest=ModelManifest.from_dict(data["manifest"]),
            artifact_hash=data["artifact_hash"],
            registered_at=data["registered_at"],
        )

    @staticmethod
    def _versions(name_dir: Path) -> list[int]:
        if not name_dir.exists():
            return []
        return [int(p.name) for p in name_dir.iterdir() if p.is_dir() and p.name.isdigit()]
