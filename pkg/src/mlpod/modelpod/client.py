"""HTTP client for the model pod."""

from __future__ import annotations

import json
import time

import httpx


class ModelpodClient:
    def __init__(self, base_url: str, token: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.timeout = timeout

    def _headers(self) -> dict:
        return {"authorization": f"Bearer {self.token}"}

    def register_model(self, manifest: dict, artifact: bytes = b"") -> dict:
        resp = httpx.post(
            f"{self.base_url}/models",
            data={"manifest": json.dumps(manifest)},
            files={"artifact": ("artifact.bin", artifact)},
            headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()

    def resolve_model(self, name: str, selector: str | int = "latest") -> dict:
        resp = httpx.get(
            f"{self.base_url}/models/{name}/{selector}",
            headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()

    def submit_job(self, name: str, selector: str | int, input_ref: str) -> str:
        resp = httpx.post(
            f"{self.base_url}/jobs",
            json={"model": {"name": name, "version": selector}, "input": input_ref},
            headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()["id"]

    def get_job(self, job_id: str) -> dict:
        resp = httpx.get(
            f"{self.base_url}/jobs/{job_id}", headers=self._headers(), timeout=self.timeout
        )
        resp.raise_for_status()
        return resp.json()

    def wait_job(self, job_id: str, timeout: float = 60.0, poll: float = 0.05) -> dict:
        deadline = time.time() + timeout
        while True:
            job = self.get_job(job_id)
            if job["state"] in ("SUCCEEDED", "FAILED") or time.time() >= deadline:
                return job
            time.sleep(poll)

    def package_model(self, name: str, selector: str | int = "latest") -> bytes:
        resp = httpx.post(
            f"{self.base_url}/models/{name}/{selector}/package",
            headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.content
