import base64
import json
import time

import pytest
from fastapi.testclient import TestClient

from mlpod.anchors import LatentRecord, anchor_set_to_dict, generate_anchors
from mlpod.edgepack import package, validate_package
from mlpod.logicpod import LogicpodConfig, PipelineStore, RunEngine, replay_events
from mlpod.logicpod.app import create_app
from mlpod.logicpod.engine import LogicpodError
from mlpod.ml2 import Ml2CompileError

from conftest import EDGE_KEY, SIGNING_KEY

import numpy as np

REGISTRY = {"modelpod": "http://modelpod", "datapod": "http://datapod"}

CLOUD_XML = (
    b'<ml2 name="cloud-only">'
    b'<inputs><input id="scan" kind="object" required="true"/></inputs>'
    b'<models><model id="m" service="modelpod" name="stub-racnet"/></models>'
    b'<pipeline><step id="s1" model="m" env="cloud"><in bind="scan"/><out id="result"/></step></pipeline>'
    b'<render title="R"><section kind="probability" source="result"/></render>'
    b"</ml2>"
)

EDGE_XML = (
    b'<ml2 name="edge-first">'
    b'<inputs><input id="scan" kind="dicom-series" required="true"/></inputs>'
    b'<models>'
    b'<model id="anon" service="modelpod" name="anonymizer"/>'
    b'<model id="m" service="modelpod" name="stub-racnet"/>'
    b'</models>'
    b"<pipeline>"
    b'<step id="s1" model="anon" env="edge" timeout-seconds="2"><in bind="scan"/><out id="clean"/></step>'
    b'<step id="s2" model="m" env="cloud" depends-on="s1"><in bind="clean"/><out id="result"/></step>'
    b"</pipeline>"
    b"</ml2>"
)


class FakeModelpod:
    """Stands in for the model service so the engine can be tested in-process."""

    def __init__(self, fail=False, version=1):
        self.fail = fail
        self.version = version
        self.submitted = []

    def submit_job(self, name, version, input_ref):
        self.submitted.append((name, version, input_ref))
        return "job-1"

    def wait_job(self, job_id, timeout=60.0):
        if self.fail:
            return {"state": "FAILED", "error": "synthetic failure"}
        return {
            "state": "SUCCEEDED",
            "model_version": self.version,
            "result": {
                "probability": 0.9,
                "threshold": 0.5,
                "latent": [0.1, 0.2],
                "slice_features": [[1.0, 0.0]],
                "patient_pseudo_id": "ANON-abc",
            },
        }

    def package_model(self, name, version):
        return package({"name": name, "version": "1", "kind": "anonymizer", "seed": 0}, EDGE_KEY)

    def resolve_model(self, name, version):
        return {"version": self.version}


def make_engine(tmp_path, fake=None, **config_kw):
    config = LogicpodConfig(services=dict(REGISTRY), root=str(tmp_path), **config_kw)
    engine = RunEngine(config, PipelineStore(), SIGNING_KEY)
    if fake is not None:
        engine._modelpod = lambda: fake
    engine._datapod = lambda: None
    return engine


def wait_run(engine, run_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        snap = engine.snapshot(run_id)
        if snap["state"] in ("COMPLETED", "FAILED"):
            return snap
        time.sleep(0.01)
    raise AssertionError("run did not settle in time")


# -- pipeline store -----------------------------------------------------------


def test_pipeline_ids_are_content_addressed():
    store = PipelineStore()
    id1 = store.register(CLOUD_XML, REGISTRY)
    id2 = store.register(CLOUD_XML, REGISTRY)
    id3 = store.register(EDGE_XML, REGISTRY)
    assert id1 == id2 != id3
    assert id1.startswith("pl-") and len(id1) == 19


def test_pipeline_validation_failure_reports_diagnostics():
    store = PipelineStore()
    with pytest.raises(LogicpodError) as exc:
        store.register(CLOUD_XML, {})
    assert exc.value.code == "validation-failed"
    assert any("unknown service" in d for d in exc.value.diagnostics)


def test_pipeline_cycle_raises_compile_error():
    xml = (
        b'<ml2 name="c"><models><model id="m" service="modelpod" name="x"/></models>'
        b'<pipeline>'
        b'<step id="a" model="m" env="cloud" depends-on="b"/>'
        b'<step id="b" model="m" env="cloud" depends-on="a"/>'
        b"</pipeline></ml2>"
    )
    with pytest.raises(Ml2CompileError) as exc:
        PipelineStore().register(xml, REGISTRY)
    assert set(exc.value.step_ids) == {"a", "b"}


def test_pipeline_get_unknown():
    with pytest.raises(LogicpodError) as exc:
        PipelineStore().get("pl-0000000000000000")
    assert exc.value.code == "not-found"


# -- event log ----------------------------------------------------------------


def test_replay_events_reconstructs_state():
    events = [
        {"seq": 0, "kind": "run", "state": "CREATED", "step": None},
        {"seq": 1, "kind": "run", "state": "RUNNING", "step": None},
        {"seq": 2, "kind": "step", "state": "RUNNING", "step": "s1"},
        {"seq": 3, "kind": "step", "state": "DONE", "step": "s1"},
        {"seq": 4, "kind": "run", "state": "COMPLETED", "step": None},
    ]
    assert replay_events(events) == {"run": "COMPLETED", "steps": {"s1": "DONE"}}


def test_replay_rejects_non_increasing_seq():
    events = [
        {"seq": 0, "kind": "run", "state": "CREATED", "step": None},
        {"seq": 0, "kind": "run", "state": "RUNNING", "step": None},
    ]
    with pytest.raises(ValueError):
        replay_events(events)


# -- runs ---------------------------------------------------------------------


def test_run_missing_required_input(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    pid = engine.pipelines.register(CLOUD_XML, REGISTRY)
    with pytest.raises(LogicpodError) as exc:
        engine.start_run(pid, {}, None)
    assert exc.value.code == "missing-input"


def test_cloud_run_completes_and_logs_events(tmp_path):
    fake = FakeModelpod()
    engine = make_engine(tmp_path, fake)
    pid = engine.pipelines.register(CLOUD_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "obj-1"}, None)
    snap = wait_run(engine, run_id)
    assert snap["state"] == "COMPLETED"
    assert snap["steps"]["s1"]["state"] == "DONE"
    assert snap["steps"]["s1"]["model_version"] == 1
    assert fake.submitted == [("stub-racnet", "latest", "obj-1")]
    # the JSONL log replays to the same terminal state
    log_file = tmp_path / "runs" / f"{run_id}.jsonl"
    events = [json.loads(line) for line in log_file.read_text().splitlines()]
    replayed = replay_events(events)
    assert replayed["run"] == "COMPLETED"
    assert replayed["steps"]["s1"] == "DONE"


def test_cloud_run_failure_marks_run_failed(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod(fail=True))
    pid = engine.pipelines.register(CLOUD_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "obj-1"}, None)
    snap = wait_run(engine, run_id)
    assert snap["state"] == "FAILED"
    assert snap["steps"]["s1"]["state"] == "FAILED"
    assert "synthetic failure" in snap["steps"]["s1"]["detail"]


def test_stream_events_resumable(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    pid = engine.pipelines.register(CLOUD_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "obj-1"}, None)
    wait_run(engine, run_id)
    first = engine.stream_events(run_id, after_seq=-1)
    assert [e["seq"] for e in first] == list(range(len(first)))
    middle = first[len(first) // 2]["seq"]
    rest = engine.stream_events(run_id, after_seq=middle)
    assert [e["seq"] for e in rest] == [e["seq"] for e in first if e["seq"] > middle]
    assert engine.stream_events(run_id, after_seq=first[-1]["seq"]) == []


def test_unknown_run(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    with pytest.raises(LogicpodError):
        engine.snapshot("nope")


# -- edge protocol ------------------------------------------------------------


def test_edge_run_claim_complete(tmp_path):
    fake = FakeModelpod()
    engine = make_engine(tmp_path, fake)
    pid = engine.pipelines.register(EDGE_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "/local/scans"}, None)
    # wait for the edge step to become claimable
    work = None
    deadline = time.time() + 5
    while work is None and time.time() < deadline:
        work = engine.claim_work(run_id)
        time.sleep(0.01)
    assert work["step_id"] == "s1"
    assert work["input_ref"] == "/local/scans"
    assert work["output_ids"] == ["clean"]
    manifest = validate_package(base64.b64decode(work["package_b64"]), EDGE_KEY)
    assert manifest["kind"] == "anonymizer"
    # second claim finds nothing
    assert engine.claim_work(run_id) is None
    engine.complete_work(run_id, "s1", {"clean": f"run-{run_id}-clean.zip"}, [])
    snap = wait_run(engine, run_id)
    assert snap["state"] == "COMPLETED"
    assert snap["steps"]["s1"]["state"] == "DONE"
    # the cloud step consumed the uploaded object id
    assert fake.submitted[-1][2] == f"run-{run_id}-clean.zip"


def test_edge_failure_fails_run(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    pid = engine.pipelines.register(EDGE_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "/x"}, None)
    deadline = time.time() + 5
    while engine.claim_work(run_id) is None and time.time() < deadline:
        time.sleep(0.01)
    engine.complete_work(run_id, "s1", None, ["slice1.dcm: unreadable"])
    snap = wait_run(engine, run_id)
    assert snap["state"] == "FAILED"
    assert "unreadable" in snap["steps"]["s1"]["detail"]


def test_edge_timeout_fails_run(tmp_path):
    xml = EDGE_XML.replace(b'timeout-seconds="2"', b'timeout-seconds="1"')
    engine = make_engine(tmp_path, FakeModelpod())
    pid = engine.pipelines.register(xml, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "/x"}, None)
    snap = wait_run(engine, run_id, timeout=10.0)
    assert snap["state"] == "FAILED"
    assert "timed out" in snap["steps"]["s1"]["detail"]


def test_complete_without_pending_work(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    with pytest.raises(LogicpodError) as exc:
        engine.complete_work("ghost", "s1", {}, [])
    assert exc.value.code == "not-found"


# -- reports ------------------------------------------------------------------


def anchor_doc():
    recs = [
        LatentRecord(np.array([0.1, 0.2]), "covid", np.array([[1.0, 0.0]])),
        LatentRecord(np.array([0.11, 0.21]), "covid", np.array([[0.9, 0.1]])),
        LatentRecord(np.array([5.0, 5.0]), "non-covid", np.array([[0.0, 1.0]])),
        LatentRecord(np.array([5.1, 5.1]), "non-covid", np.array([[0.1, 1.0]])),
    ]
    return anchor_set_to_dict(generate_anchors(recs, 2, seed=0, name="c19"))


class FakeDatapod:
    def __init__(self, doc):
        self.doc = doc
        self.objects = {}

    def get_anchor_set(self, name, selector):
        return 1, self.doc

    def put_object(self, obj_id, data, media_type):
        self.objects[obj_id] = data
        return {"id": obj_id}


def test_report_requires_completed_run(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    pid = engine.pipelines.register(EDGE_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "/x"}, None)
    with pytest.raises(LogicpodError) as exc:
        engine.render_report(run_id)
    assert exc.value.code == "run-not-completed"
    deadline = time.time() + 5
    while engine.claim_work(run_id) is None and time.time() < deadline:
        time.sleep(0.01)
    engine.complete_work(run_id, "s1", {"clean": "z"}, [])
    wait_run(engine, run_id)


def test_report_degraded_without_anchor_set(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod())
    pid = engine.pipelines.register(CLOUD_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "obj"}, None)
    wait_run(engine, run_id)
    report = engine.render_report(run_id)
    assert report["probability"] == 0.9
    assert report["label"] == "positive"
    assert report["warning"] == "explanations unavailable"
    assert "anchor_id" not in report


def test_report_full_with_anchor_set(tmp_path):
    engine = make_engine(tmp_path, FakeModelpod(), anchor_set_name="c19")
    datapod = FakeDatapod(anchor_doc())
    engine._datapod = lambda: datapod
    pid = engine.pipelines.register(CLOUD_XML, REGISTRY)
    run_id = engine.start_run(pid, {"scan": "obj"}, None)
    wait_run(engine, run_id)
    report = engine.render_report(run_id)
    assert report["anchor_label"] == "covid"  # latent [0.1, 0.2] sits in the covid cluster
    assert report["anchor_id"] in ("a0", "a1")
    assert 0.0 <= report["anchor_confidence"] <= 1.0
    assert report["similar_slices"]
    assert report["explanation_text"].startswith(
        f"Assigned to anchor {report['anchor_id']} (covid) at distance"
    )
    assert report["patient_pseudo_id"] == "ANON-abc"
    trace_steps = {t["step"] for t in report["pipeline_trace"]}
    assert trace_steps == {"s1"}
    # cached and persisted
    assert engine.render_report(run_id) is report
    assert f"run-{run_id}-report.json" in datapod.objects


# -- HTTP surface -------------------------------------------------------------


@pytest.fixture
def api(tmp_path, token_service):
    engine = make_engine(tmp_path, FakeModelpod())
    engine.discover_services = lambda: {
        name: {"url": url, "healthy": True} for name, url in REGISTRY.items()
    }
    client = TestClient(create_app(engine, SIGNING_KEY))
    token = token_service.issue_token("doctor1", "secret", {"app:access"}, 600)
    return client, {"authorization": f"Bearer {token}"}


def test_http_register_and_run(api):
    client, headers = api
    resp = client.post("/pipelines", content=CLOUD_XML, headers=headers)
    assert resp.status_code == 200
    pid = resp.json()["pipeline_id"]
    resp = client.post("/runs", json={"pipeline_id": pid, "inputs": {"scan": "obj"}}, headers=headers)
    run_id = resp.json()["run_id"]
    deadline = time.time() + 10
    while time.time() < deadline:
        snap = client.get(f"/runs/{run_id}", headers=headers).json()
        if snap["state"] in ("COMPLETED", "FAILED"):
            break
        time.sleep(0.02)
    assert snap["state"] == "COMPLETED"
    events = client.get(f"/runs/{run_id}/events", headers=headers).json()["events"]
    assert events[0]["state"] == "CREATED"
    report = client.get(f"/runs/{run_id}/report", headers=headers).json()
    assert report["label"] == "positive"


def test_http_requires_token(api):
    client, _ = api
    assert client.get("/services").status_code == 401


def test_http_cycle_detected(api):
    client, headers = api
    xml = (
        b'<ml2 name="c"><models><model id="m" service="modelpod" name="x"/></models>'
        b'<pipeline><step id="a" model="m" env="cloud" depends-on="b"/>'
        b'<step id="b" model="m" env="cloud" depends-on="a"/></pipeline></ml2>'
    )
    resp = client.post("/pipelines", content=xml, headers=headers)
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["error"] == "cycle-detected"
    assert set(detail["steps"]) == {"a", "b"}


def test_http_ml2_error_carries_location(api):
    client, headers = api
    resp = client.post("/pipelines", content=b'<ml2 name="x"><oops/></ml2>', headers=headers)
    assert resp.status_code == 422
    detail = resp.json()["detail"]
    assert detail["error"] == "ml2-error"
    assert detail["line"] >= 1
    assert "oops" in detail["detail"]


def test_http_validation_diagnostics(api, tmp_path, token_service):
    engine = make_engine(tmp_path / "v", FakeModelpod())
    engine.discover_services = lambda: {}
    client = TestClient(create_app(engine, SIGNING_KEY))
    token = token_service.issue_token("doctor1", "secret", {"app:access"}, 600)
    resp = client.post(
        "/pipelines", content=CLOUD_XML, headers={"authorization": f"Bearer {token}"}
    )
    assert resp.status_code == 422
    assert resp.json()["detail"]["error"] == "validation-failed"
    assert resp.json()["detail"]["diagnostics"]


def test_http_missing_input(api):
    client, headers = api
    pid = client.post("/pipelines", content=CLOUD_XML, headers=headers).json()["pipeline_id"]
    resp = client.post("/runs", json={"pipeline_id": pid, "inputs": {}}, headers=headers)
    assert resp.status_code == 422
    assert resp.json()["detail"]["error"] == "missing-input"
