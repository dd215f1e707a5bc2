"""Inference job queue with a bounded worker pool.

Job states move only QUEUED -> RUNNING -> (SUCCEEDED | FAILED); snapshots
returned to callers are immutable copies.
"""

from __future__ import annotations

import threading
import time
import queue
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

from ..authpod.core import Claims
from ..common import new_ulid
from ..modeladapter.io import read_scan
from ..modeladapter.stub import infer
from .registry import ModelRegistry, ModelpodError

TERMINAL = ("SUCCEEDED", "FAILED")


@dataclass
class Job:
    id: str
    owner: str
    model_name: str
    model_selector: str
    input_ref: str
    state: str = "QUEUED"
    result: dict | None = None
    error: str | None = None
    submitted_at: float = field(default_factory=time.time)
    started_at: float | None = None
    ended_at: float | None = None
    model_version: int | None = None


class JobManager:
    """fetch_input maps an input ref to a local directory of DICOM files."""

    def __init__(
        self,
        registry: ModelRegistry,
        fetch_input: Callable[[str], Path],
        workers: int = 2,
    ):
        self.registry = registry
        self.fetch_input = fetch_input
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()
        self._queue: queue.Queue[str] = queue.Queue()
        self._threads = [
            threading.Thread(target=self._worker, daemon=True, name=f"job-worker-{i}")
            for i in range(workers)
        ]
        for t in self._threads:
            t.start()

    def submit(self, model_name: str, model_selector: str, input_ref: str, claims: Claims) -> str:
        if "model:execute" not in claims.scopes:
            raise ModelpodError("scope-denied", "requires model:execute")
        with self._lock:
            if claims.limits.max_jobs is not None:
                active = sum(
                    1
                    for j in self._jobs.values()
                    if j.owner == claims.sub and j.state not in TERMINAL
                )
                if active >= claims.limits.max_jobs:
                    raise ModelpodError("limit-exceeded", f"max_jobs={claims.limits.max_jobs}")
            job = Job(
                id=new_ulid(),
                owner=claims.sub,
                model_name=model_name,
                model_selector=model_selector,
                input_ref=input_ref,
            )
            self._jobs[job.id] = job
        self._queue.put(job.id)
        return job.id

    def get(self, job_id: str, claims: Claims) -> Job:
        if "model:execute" not in claims.scopes and "model:admin" not in claims.scopes:
            raise ModelpodError("scope-denied", "requires model:execute")
        with self._lock:
            job = self._jobs.get(job_id)
            if job is None:
                raise ModelpodError("not-found", job_id)
            if job.owner != claims.sub and "model:admin" not in claims.scopes:
                raise ModelpodError("scope-denied", "not the job owner")
            return replace(job)

    def wait(self, job_id: str, claims: Claims, timeout: float = 30.0) -> Job:
        deadline = time.time() + timeout
        while True:
            job = self.get(job_id, claims)
            if job.state in TERMINAL or time.time() >= deadline:
                return job
            time.sleep(0.02)

    def _set(self, job_id: str, **changes) -> None:
        with self._lock:
            job = self._jobs[job_id]
            for k, v in changes.items():
                setattr(job, k, v)

    def _worker(self) -> None:
        while True:
            job_id = self._queue.get()
            self._set(job_id, state="RUNNING", started_at=time.time())
            try:
                with self._lock:
                    job = replace(self._jobs[job_id])
                record = self.registry.resolve(job.model_name, job.model_selector)
                if record.manifest.kind != "stub":
                    raise RuntimeError(f"model kind {record.manifest.kind!r} not executable here")
                input_dir = self.fetch_input(job.input_ref)
                scan, meta = read_scan(input_dir)
                result = infer(scan, record.manifest)
                payload = result.to_dict()
                payload.update(meta)
                payload["threshold"] = record.manifest.threshold
                self._set(
                    job_id,
                    state="SUCCEEDED",
                    result=payload,
                    model_version=record.version,
                    ended_at=time.time(),
                )
            except Exception as exc:
                self._set(job_id, state="FAILED", error=str(exc), ended_at=time.time())
