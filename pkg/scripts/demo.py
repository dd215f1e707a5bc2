#!/usr/bin/env python3
"""One-process demo: boot all four pods, run the canonical pipeline end to end.

Starts authpod, datapod, modelpod, and logicpod on loopback ports, registers
the anonymizer and stub diagnosis models, publishes an anchor set, generates a
synthetic DICOM series, then drives an edge agent through the
anonymize -> infer -> explain pipeline and prints the diagnosis report.
"""

import argparse
import json
import socket
import tempfile
import threading
import time
from pathlib import Path

import httpx
import numpy as np
import uvicorn

from mlpod.anchors import LatentRecord, anchor_set_to_dict, generate_anchors
from mlpod.authpod.app import create_app as authpod_app
from mlpod.authpod.core import Client, ClientRegistry, TokenService
from mlpod.datapod.app import create_app as datapod_app
from mlpod.datapod.client import DatapodClient
from mlpod.datapod.store import ObjectStore
from mlpod.edgeagent.runtime import run_agent
from mlpod.logicpod import LogicpodConfig, PipelineStore, RunEngine
from mlpod.logicpod.app import create_app as logicpod_app
from mlpod.modeladapter import ModelManifest, ScanInput, infer
from mlpod.modelpod.app import create_app as modelpod_app, make_input_fetcher
from mlpod.modelpod.client import ModelpodClient
from mlpod.modelpod.jobs import JobManager
from mlpod.modelpod.registry import ModelRegistry

SIGNING_KEY = b"demo-signing-key-demo-signing-ke"
EDGE_KEY = b"demo-edge-key-00demo-edge-key-00"

PIPELINE_XML = b"""<ml2 name="covid-detect">
<inputs><input id="scan" kind="dicom-series" required="true"/></inputs>
<models>
<model id="anon" service="modelpod" name="anonymizer" version="latest"/>
<model id="racnet" service="modelpod" name="stub-racnet" version="latest"/>
</models>
<pipeline>
<step id="s1" model="anon" env="edge"><in bind="scan"/><out id="clean"/></step>
<step id="s2" model="racnet" env="cloud" depends-on="s1"><in bind="clean"/><out id="result"/></step>
</pipeline>
<render title="Covid19 Report">
<section kind="probability" source="result"/>
<section kind="similar-slices" source="result"/>
</render>
</ml2>"""

STUB_MANIFEST = {
    "name": "stub-racnet",
    "kind": "stub",
    "version": "0",
    "L": 16,
    "F": 8,
    "seed": 1,
    "threshold": 0.5,
}


def serve(app):
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        port = s.getsockname()[1]
    server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error"))
    threading.Thread(target=server.run, daemon=True).start()
    url = f"http://127.0.0.1:{port}"
    while True:
        try:
            if httpx.get(f"{url}/healthz", timeout=1.0).status_code == 200:
                return url
        except httpx.TransportError:
            time.sleep(0.05)


def build_anchor_set():
    manifest = ModelManifest.from_dict(STUB_MANIFEST)
    records = []
    for i in range(10):
        rng = np.random.default_rng(1000 + i)
        scan = ScanInput(
            [rng.integers(0, 300 + 120 * i, size=(16, 16), dtype=np.uint16) for _ in range(4)]
        )
        result = infer(scan, manifest)
        records.append(
            LatentRecord(
                result.latent,
                "covid" if i % 2 else "non-covid",
                result.slice_features,
                representative_images=[f"reference-slice-{i}"],
            )
        )
    doc = anchor_set_to_dict(generate_anchors(records, 3, seed=0, name="covid-anchors"))
    doc["provenance"] = {
        "model_name": "stub-racnet",
        "model_version": "1",
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ"),
    }
    return doc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--slices", type=int, default=16)
    parser.add_argument("--workdir", default=None, help="defaults to a temp directory")
    parser.add_argument("--static-dir", default=None, help="serve a built webapp at /app")
    parser.add_argument("--keep-running", action="store_true", help="leave the pods up after the demo run")
    args = parser.parse_args()

    workdir = Path(args.workdir) if args.workdir else Path(tempfile.mkdtemp(prefix="mlpod-demo-"))
    workdir.mkdir(parents=True, exist_ok=True)
    print(f"workdir: {workdir}")

    clients = ClientRegistry(
        [
            Client(
                "doctor1",
                "secret",
                frozenset({"app:access", "model:execute", "data:read", "data:write"}),
            ),
            Client(
                "admin",
                "admin-secret",
                frozenset(
                    {"model:admin", "model:execute", "model:dispatch", "data:read", "data:write"}
                ),
            ),
        ]
    )
    auth_url = serve(authpod_app(TokenService(SIGNING_KEY, clients)))
    data_url = serve(datapod_app(ObjectStore(workdir / "data"), SIGNING_KEY))
    registry = ModelRegistry(workdir / "models")
    jobs = JobManager(registry, make_input_fetcher(data_url, SIGNING_KEY), workers=2)
    model_url = serve(modelpod_app(registry, jobs, SIGNING_KEY, EDGE_KEY))
    engine = RunEngine(
        LogicpodConfig(
            services={"authpod": auth_url, "datapod": data_url, "modelpod": model_url},
            anchor_set_name="covid-anchors",
            root=str(workdir / "logic"),
            static_dir=args.static_dir,
        ),
        PipelineStore(),
        SIGNING_KEY,
    )
    logic_url = serve(logicpod_app(engine, SIGNING_KEY))
    print(f"authpod  {auth_url}")
    print(f"datapod  {data_url}")
    print(f"modelpod {model_url}")
    print(f"logicpod {logic_url}")

    def token(client_id, secret, scope):
        resp = httpx.post(
            f"{auth_url}/token",
            json={"client_id": client_id, "client_secret": secret, "scope": scope},
        )
        resp.raise_for_status()
        return resp.json()["access_token"]

    admin = token("admin", "admin-secret", "model:admin data:read data:write")
    modelpod = ModelpodClient(model_url, admin)
    modelpod.register_model({"name": "anonymizer", "kind": "anonymizer", "version": "0", "seed": 0})
    modelpod.register_model(STUB_MANIFEST)
    DatapodClient(data_url, admin).put_anchor_set("covid-anchors", build_anchor_set())
    print("registered anonymizer + stub-racnet models and the anchor set")

    import subprocess
    import sys

    series = workdir / "series"
    subprocess.run(
        [sys.executable, str(Path(__file__).with_name("gen_series.py")),
         "--out", str(series), "--slices", str(args.slices)],
        check=True,
    )

    app_token = token("doctor1", "secret", "app:access data:read data:write")
    headers = {"authorization": f"Bearer {app_token}"}
    pipeline_id = httpx.post(
        f"{logic_url}/pipelines", content=PIPELINE_XML, headers=headers
    ).json()["pipeline_id"]
    run_id = httpx.post(
        f"{logic_url}/runs",
        json={"pipeline_id": pipeline_id, "inputs": {"scan": str(series)}},
        headers=headers,
    ).json()["run_id"]
    print(f"pipeline {pipeline_id}  run {run_id}")

    threading.Thread(
        target=run_agent,
        args=(logic_url, run_id, series, workdir / "edge-out", app_token, EDGE_KEY),
        daemon=True,
    ).start()

    seen = -1
    while True:
        events = httpx.get(
            f"{logic_url}/runs/{run_id}/events",
            params={"after": seen, "wait": 5.0},
            headers=headers,
        ).json()["events"]
        for ev in events:
            seen = ev["seq"]
            target = ev["step"] or "run"
            print(f"  [{ev['seq']:02d}] {target:<6} {ev['state']}" + (f"  {ev['detail']}" if ev["detail"] else ""))
        state = httpx.get(f"{logic_url}/runs/{run_id}", headers=headers).json()["state"]
        if state in ("COMPLETED", "FAILED"):
            break

    if state == "COMPLETED":
        report = httpx.get(f"{logic_url}/runs/{run_id}/report", headers=headers).json()
        print("\ndiagnosis report:")
        print(json.dumps(report, indent=2))
    else:
        print("run failed; see events above")

    if args.keep_running:
        print("\npods left running; press Ctrl-C to stop")
        print(f"  app token: {app_token}")
        try:
            while True:
                time.sleep(1)
        except KeyboardInterrupt:
            pass


if __name__ == "__main__":
    main()
