"""HTTP client for the data pod, used by pods and the edge agent."""

from __future__ import annotations

import httpx


class DatapodClient:
    def __init__(self, base_url: str, token: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.timeout = timeout

    def _headers(self, **extra) -> dict:
        return {"authorization": f"Bearer {self.token}", **extra}

    def put_object(self, obj_id: str, data: bytes, media_type: str = "application/octet-stream") -> dict:
        resp = httpx.put(
            f"{self.base_url}/objects/{obj_id}",
            content=data,
            headers=self._headers(**{"content-type": media_type}),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()

    def get_object(self, obj_id: str) -> bytes:
        resp = httpx.get(
            f"{self.base_url}/objects/{obj_id}", headers=self._headers(), timeout=self.timeout
        )
        resp.raise_for_status()
        return resp.content

    def put_anchor_set(self, name: str, doc: dict) -> int:
        resp = httpx.put(
            f"{self.base_url}/anchorsets/{name}",
            json=doc,
            headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()["version"]

    def get_anchor_set(self, name: str, selector: str | int = "latest") -> tuple[int, dict]:
        resp = httpx.get(
            f"{self.base_url}/anchorsets/{name}/{selector}",
            headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        body = resp.json()
        return body["version"], body["document"]
