"""Doctor-side runtime: validate dispatched packages, execute them locally,
upload only the produced outputs.

The pseudonym map is written next to (never inside) the output directory, so
uploads can take the whole output directory without leaking it.
"""

from __future__ import annotations

import base64
import hashlib
import io
import json
import time
import zipfile
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from ..datapod.client import DatapodClient
from ..dicomkit.anonymize import anonymize, default_profile
from ..dicomkit.parse import DicomParseError, parse_dicom, serialize_dicom
from ..edgepack import PackageError, validate_package  # noqa: F401  (re-exported)
from ..modeladapter.io import read_scan
from ..modeladapter.stub import ModelManifest, infer

RETRY_DELAYS = (0.5, 1.0, 2.0)


@dataclass
class ExecutionSummary:
    kind: str
    files_in: int
    files_out: int
    duration: float
    failures: list[str] = field(default_factory=list)


def _anonymizer_salt(manifest: dict) -> bytes:
    return hashlib.sha256(f"mlpod-anon-salt-{manifest.get('seed', 0)}".encode()).digest()


def execute_package(
    manifest: dict,
    input_dir: str | Path,
    output_dir: str | Path,
    map_file: str | Path | None = None,
) -> ExecutionSummary:
    kind = manifest.get("kind")
    if kind not in ("anonymizer", "stub"):
        raise ValueError(f"unknown manifest kind {kind!r}")
    input_dir = Path(input_dir)
    output_dir = Path(output_dir)
    if not input_dir.is_dir():
        raise ValueError(f"input directory {input_dir} is not readable")
    started = time.time()
    output_dir.mkdir(parents=True, exist_ok=True)
    failures: list[str] = []
    files_out = 0

    if kind == "anonymizer":
        profile = default_profile(_anonymizer_salt(manifest))
        combined: dict[str, str] = {}
        paths = sorted(input_dir.glob("*.dcm"))
        for path in paths:
            try:
                obj = parse_dicom(path.read_bytes())
                anon, pmap = anonymize(obj, profile)
                (output_dir / path.name).write_bytes(serialize_dicom(anon))
                combined.update(pmap.entries)
                files_out += 1
            except DicomParseError as exc:
                failures.append(f"{path.name}: {exc}")
        if map_file is None:
            map_file = output_dir.parent / f"{output_dir.name}-pseudonyms.json"
        Path(map_file).write_text(json.dumps({"entries": combined}, indent=2))
        files_in = len(paths)
    else:
        files_in = len(sorted(input_dir.glob("*.dcm")))
        try:
            scan, meta = read_scan(input_dir)
            result = infer(scan, ModelManifest.from_dict(manifest))
            payload = result.to_dict()
            payload.update(meta)
            (output_dir / "result.json").write_text(json.dumps(payload))
            files_out = 1
        except Exception as exc:
            failures.append(str(exc))

    return ExecutionSummary(
        kind=kind,
        files_in=files_in,
        files_out=files_out,
        duration=time.time() - started,
        failures=failures,
    )


def _with_retries(fn, delays=RETRY_DELAYS):
    last_exc = None
    for attempt in range(len(delays) + 1):
        try:
            return fn()
        except (httpx.TransportError, httpx.HTTPStatusError) as exc:
            last_exc = exc
            if attempt < len(delays):
                time.sleep(delays[attempt])
    raise RuntimeError(f"giving up after {len(delays) + 1} attempts: {last_exc}")


def _zip_dir(directory: Path) -> bytes:
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for path in sorted(directory.iterdir()):
            if path.is_file():
                zf.writestr(path.name, path.read_bytes())
    return buf.getvalue()


def run_agent(
    logic_url: str,
    run_id: str,
    input_dir: str | Path,
    output_dir: str | Path,
    token: str,
    edge_key: bytes,
    package_file: str | Path | None = None,
    poll_interval: float = 0.1,
    claim_timeout: float = 60.0,
    retry_delays=RETRY_DELAYS,
) -> int:
    """Claim, validate, execute, upload. Returns a process exit code."""
    if package_file is not None:
        manifest = validate_package(Path(package_file).read_bytes(), edge_key)
        summary = execute_package(manifest, input_dir, output_dir)
        return 1 if summary.failures else 0

    headers = {"authorization": f"Bearer {token}"}

    def claim():
        resp = httpx.post(
            f"{logic_url.rstrip('/')}/edge/claim",
            json={"run_id": run_id},
            headers=headers,
            timeout=10.0,
        )
        resp.raise_for_status()
        return resp.json()["work"]

    deadline = time.time() + claim_timeout
    work = None
    while work is None:
        work = _with_retries(claim, retry_delays)
        if work is None:
            if time.time() >= deadline:
                raise RuntimeError("no edge work appeared before the claim timeout")
            time.sleep(poll_interval)

    manifest = validate_package(base64.b64decode(work["package_b64"]), edge_key)
    summary = execute_package(manifest, input_dir, output_dir)

    def services():
        resp = httpx.get(f"{logic_url.rstrip('/')}/services", headers=headers, timeout=10.0)
        resp.raise_for_status()
        return resp.json()

    outputs = None
    if summary.files_out > 0:
        datapod_url = _with_retries(services, retry_delays).get("datapod", {}).get("url")
        if datapod_url is None:
            raise RuntimeError("no datapod service available for upload")
        datapod = DatapodClient(datapod_url, token)
        outputs = {}
        blob = _zip_dir(Path(output_dir))
        for out_id in work["output_ids"]:
            obj_id = f"run-{run_id}-{out_id}.zip"
            _with_retries(lambda: datapod.put_object(obj_id, blob, "application/zip"), retry_delays)
            outputs[out_id] = obj_id

    def complete():
        resp = httpx.post(
            f"{logic_url.rstrip('/')}/edge/complete",
            json={
                "run_id": run_id,
                "step_id": work["step_id"],
                "outputs": outputs,
                "failures": summary.failures,
            },
            headers=headers,
            timeout=10.0,
        )
        resp.raise_for_status()

    _with_retries(complete, retry_delays)
    return 1 if summary.failures else 0
