import json
import time

import pytest
from fastapi.testclient import TestClient

from chartsum.agents import PipelineConfig, run_pipeline
from chartsum.backend import MockBackend
from chartsum.server import create_app
from chartsum.sumdoc import serialize


@pytest.fixture()
def app_client(tmp_path):
    app = create_app(data_dir=tmp_path, backend=MockBackend(seed=7), workers=2)
    with TestClient(app) as client:
        yield client, tmp_path


def submit_stocks(client, stocks_spec, stocks_csv, seed=7):
    body = {
        "spec": stocks_spec,
        "data_csv": stocks_csv.decode(),
        "config": {"seed": seed},
    }
    resp = client.post("/jobs", json=body)
    assert resp.status_code == 200
    return resp.json()["id"]


def wait_done(client, job_id, timeout=60.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        state = client.get(f"/jobs/{job_id}").json()["state"]
        if state in ("done", "failed"):
            return state
        time.sleep(0.1)
    raise TimeoutError(job_id)


def test_submit_poll_done_matches_direct_run(app_client, stocks_spec, stocks_csv):
    client, _ = app_client
    job_id = submit_stocks(client, stocks_spec, stocks_csv)
    assert wait_done(client, job_id) == "done"
    via_api = client.get(f"/jobs/{job_id}/summary").json()
    direct, _ = run_pipeline(
        stocks_spec, stocks_csv, PipelineConfig(seed=7), MockBackend(seed=7),
        chart_id=job_id,
    )
    assert via_api == json.loads(serialize(direct))


def test_unsupported_mark_rejected_at_submit(app_client):
    client, _ = app_client
    spec = json.dumps({
        "title": "t", "mark": "bar",
        "encoding": {"x": {"field": "a"}, "y": {"field": "b"}},
    })
    resp = client.post("/jobs", json={"spec": spec, "data_csv": "a,b\n1,2\n2,3"})
    assert resp.status_code == 422
    assert resp.json()["detail"]["error"] == "UnsupportedMark"


def test_duplicate_submission_gets_new_id(app_client, stocks_spec, stocks_csv):
    client, _ = app_client
    first = submit_stocks(client, stocks_spec, stocks_csv)
    second = submit_stocks(client, stocks_spec, stocks_csv)
    assert first != second


def test_unknown_job_404(app_client):
    client, _ = app_client
    assert client.get("/jobs/doesnotexist").status_code == 404
    assert client.get("/jobs/doesnotexist/summary").status_code == 404
    assert client.get("/jobs/doesnotexist/transcript").status_code == 404


def test_chat_before_done_conflicts(app_client, stocks_spec, stocks_csv):
    client, tmp_path = app_client
    job_id = submit_stocks(client, stocks_spec, stocks_csv)
    # poke immediately; tolerate the race where the job already finished
    resp = client.post(f"/jobs/{job_id}/chat", json={"message": "hi"})
    assert resp.status_code in (200, 409)
    wait_done(client, job_id)


def test_chat_versions_accumulate(app_client, stocks_spec, stocks_csv):
    client, _ = app_client
    job_id = submit_stocks(client, stocks_spec, stocks_csv)
    wait_done(client, job_id)
    r1 = client.post(
        f"/jobs/{job_id}/chat",
        json={"message": "Add the 2008 Apple decline."},
    )
    assert r1.status_code == 200
    assert r1.json()["version"] == 1
    r2 = client.post(
        f"/jobs/{job_id}/chat",
        json={"message": "Please soften the wording about Apple."},
    )
    assert r2.json()["version"] == 2
    # latest summary reflects the chat edits
    latest = client.get(f"/jobs/{job_id}/summary").json()
    assert latest == r2.json()["summary"]


def test_transcript_covers_all_stages(app_client, stocks_spec, stocks_csv):
    client, _ = app_client
    job_id = submit_stocks(client, stocks_spec, stocks_csv)
    wait_done(client, job_id)
    events = client.get(f"/jobs/{job_id}/transcript").json()["events"]
    stages = {e["stage"] for e in events}
    assert {"ingest", "brainstorming", "refining", "selfcheck"} <= stages


def test_restart_preserves_completed_jobs(tmp_path, stocks_spec, stocks_csv):
    app = create_app(data_dir=tmp_path, backend=MockBackend(seed=7), workers=2)
    with TestClient(app) as client:
        job_id = submit_stocks(client, stocks_spec, stocks_csv)
        wait_done(client, job_id)
        before = client.get(f"/jobs/{job_id}/summary").json()

    fresh = create_app(data_dir=tmp_path, backend=MockBackend(seed=7), workers=2)
    with TestClient(fresh) as client:
        assert client.get(f"/jobs/{job_id}").json()["state"] == "done"
        after = client.get(f"/jobs/{job_id}/summary").json()
    assert after == before


def test_evaluate_endpoint(app_client, mini_corpus_dir):
    client, _ = app_client
    resp = client.post("/evaluate", json={"corpus_dir": str(mini_corpus_dir)})
    assert resp.status_code == 200
    payload = resp.json()
    assert len(payload["entries"]) == 6
    assert payload["stats"]["total"] == 12
    assert "gold" in payload["report"]


def test_evaluate_bad_corpus(app_client, tmp_path):
    client, _ = app_client
    resp = client.post("/evaluate", json={"corpus_dir": str(tmp_path / "nope")})
    assert resp.status_code == 422
