"""HTTP service tests: jobs, versioned edits, QA, logs, persistence."""

import json
import time

import pytest
from fastapi.testclient import TestClient

from hotree.gateway import MockGateway, MockScript
from hotree.service import SUCCESS_MESSAGE, create_app
from hotree.agent import extract_tag

from xlsx_fixtures import make_xlsx

CSV = b"Name,Price\nA,3\nB,5"


@pytest.fixture
def client(tmp_path):
    app = create_app(tmp_path / "data", gateway=MockGateway())
    with TestClient(app) as c:
        yield c


def wait_for_job(client, job_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        job = client.get(f"/api/v1/jobs/{job_id}").json()
        if job["status"] in ("succeeded", "failed"):
            return job
        time.sleep(0.02)
    raise AssertionError("job did not finish in time")


def upload_csv(client, name="sales.csv", data=CSV, mode="heuristic"):
    resp = client.post(
        "/api/v1/jobs",
        files=[("files", (name, data, "text/csv"))],
        data={"mode": mode},
    )
    assert resp.status_code == 200, resp.text
    return wait_for_job(client, resp.json()["job_id"])


class TestJobs:
    def test_csv_build_lifecycle(self, client):
        job = upload_csv(client)
        assert job["status"] == "succeeded"
        assert job["message"] == SUCCESS_MESSAGE
        assert len(job["tree_ids"]) == 1
        assert job["status_history"] == ["queued", "running", "succeeded"]

    def test_unsupported_format_rejected_synchronously(self, client):
        resp = client.post(
            "/api/v1/jobs",
            files=[("files", ("report.docx", b"...", "application/msword"))],
        )
        assert resp.status_code == 400
        body = resp.json()
        assert body["code"] == "unsupported_format"
        assert "message" in body

    def test_two_sheet_workbook_merges_to_one_tree(self, client):
        data = make_xlsx([
            ("S1", [["Name", "Price"], ["A", 3]], []),
            ("S2", [["City", "Pop"], ["x", 7]], []),
        ])
        job = upload_csv(client, name="book.xlsx", data=data)
        assert job["status"] == "succeeded"
        assert len(job["tree_ids"]) == 1
        tree = client.get(f"/api/v1/trees/{job['tree_ids'][0]}").json()
        root_children = tree["nodes"][tree["root"]]["children"]
        labels = [tree["nodes"][c]["label"] for c in root_children]
        assert labels == ["S1", "S2"]

    def test_per_file_failure_does_not_fail_siblings(self, client):
        resp = client.post(
            "/api/v1/jobs",
            files=[
                ("files", ("good.csv", CSV, "text/csv")),
                ("files", ("bad.csv", b"", "text/csv")),
            ],
            data={"mode": "heuristic"},
        )
        job = wait_for_job(client, resp.json()["job_id"])
        assert job["status"] == "succeeded"
        assert len(job["tree_ids"]) == 1
        assert any("bad.csv" in w for w in job["warnings"])

    def test_unknown_job_404(self, client):
        assert client.get("/api/v1/jobs/nope").status_code == 404


class TestTrees:
    def test_get_returns_canonical_bytes_with_version(self, client):
        job = upload_csv(client)
        tree_id = job["tree_ids"][0]
        resp = client.get(f"/api/v1/trees/{tree_id}")
        assert resp.status_code == 200
        assert resp.headers["X-Tree-Version"] == "1"
        doc = json.loads(resp.content)
        assert doc["schema_version"] == 1
        # canonical: sorted keys, compact separators
        assert resp.content == json.dumps(
            doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False
        ).encode()

    def test_list_trees(self, client):
        upload_csv(client)
        entries = client.get("/api/v1/trees").json()
        assert len(entries) == 1
        assert entries[0]["version"] == 1
        assert entries[0]["node_count"] == 7

    def test_patch_rename_bumps_version(self, client):
        job = upload_csv(client)
        tree_id = job["tree_ids"][0]
        tree = client.get(f"/api/v1/trees/{tree_id}").json()
        price = next(k for k, n in tree["nodes"].items()
                     if n["label"] == "Price")
        resp = client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [{"op": "rename", "node": price, "new_label": "Cost"}],
        })
        assert resp.status_code == 200
        assert resp.json()["version"] == 2
        updated = client.get(f"/api/v1/trees/{tree_id}").json()
        assert updated["nodes"][price]["label"] == "Cost"

    def test_stale_base_version_conflict(self, client):
        job = upload_csv(client)
        tree_id = job["tree_ids"][0]
        tree = client.get(f"/api/v1/trees/{tree_id}").json()
        price = next(k for k, n in tree["nodes"].items()
                     if n["label"] == "Price")
        ok = client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [{"op": "rename", "node": price, "new_label": "Cost"}],
        })
        assert ok.status_code == 200
        stale = client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [{"op": "rename", "node": price, "new_label": "X"}],
        })
        assert stale.status_code == 409
        assert stale.json()["code"] == "version_conflict"
        current = client.get(f"/api/v1/trees/{tree_id}").json()
        assert current["nodes"][price]["label"] == "Cost"

    def test_root_deletion_batch_atomic_422(self, client):
        job = upload_csv(client)
        tree_id = job["tree_ids"][0]
        tree = client.get(f"/api/v1/trees/{tree_id}").json()
        price = next(k for k, n in tree["nodes"].items()
                     if n["label"] == "Price")
        before = client.get(f"/api/v1/trees/{tree_id}").content
        resp = client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [
                {"op": "rename", "node": price, "new_label": "Cost"},
                {"op": "delete", "node": tree["root"]},
            ],
        })
        assert resp.status_code == 422
        after = client.get(f"/api/v1/trees/{tree_id}")
        assert after.content == before
        assert after.headers["X-Tree-Version"] == "1"


class TestSessionsAndQuestions:
    def test_question_round_trip(self, client):
        upload_csv(client)
        session_id = client.post("/api/v1/sessions").json()["session_id"]
        resp = client.post(f"/api/v1/sessions/{session_id}/questions",
                           json={"question": "sum of Price"})
        assert resp.status_code == 200
        body = resp.json()
        assert body["text"] == "8"
        assert body["confidence"] == 1.0
        assert body["elapsed_ms"] >= 0
        assert body["trace"]["retrieval_path"]
        assert [r["note"] for r in body["trace"]["records"]]
        assert body["routing"]["route"] == "aggregation"

    def test_unknown_session_404(self, client):
        resp = client.post("/api/v1/sessions/nope/questions",
                           json={"question": "hi"})
        assert resp.status_code == 404
        assert resp.json()["code"] == "session_not_found"

    def test_oversized_question_413(self, client):
        upload_csv(client)
        session_id = client.post("/api/v1/sessions").json()["session_id"]
        resp = client.post(f"/api/v1/sessions/{session_id}/questions",
                           json={"question": "x" * 70_000})
        assert resp.status_code == 413

    def test_question_after_edit_uses_latest_tree(self, client):
        job = upload_csv(client)
        tree_id = job["tree_ids"][0]
        session_id = client.post("/api/v1/sessions").json()["session_id"]
        first = client.post(f"/api/v1/sessions/{session_id}/questions",
                            json={"question": "sum of Price"}).json()
        assert first["text"] == "8"
        tree = client.get(f"/api/v1/trees/{tree_id}").json()
        price = next(k for k, n in tree["nodes"].items()
                     if n["label"] == "Price")
        client.patch(f"/api/v1/trees/{tree_id}", json={
            "base_version": 1,
            "edits": [{"op": "rename", "node": price, "new_label": "Cost"}],
        })
        second = client.post(f"/api/v1/sessions/{session_id}/questions",
                             json={"question": "sum of Cost"}).json()
        assert second["text"] == "8"
        assert second["confidence"] == 1.0

    def test_session_history_listed(self, client):
        upload_csv(client)
        session_id = client.post("/api/v1/sessions").json()["session_id"]
        client.post(f"/api/v1/sessions/{session_id}/questions",
                    json={"question": "sum of Price"})
        client.post(f"/api/v1/sessions/{session_id}/questions",
                    json={"question": "count of Price"})
        doc = client.get(f"/api/v1/sessions/{session_id}").json()
        assert len(doc["turns"]) == 2
        summaries = client.get("/api/v1/sessions").json()
        assert summaries[0]["turn_count"] == 2


class TestLogsEndpoint:
    def test_cursor_pagination(self, client):
        upload_csv(client)
        first = client.get("/api/v1/logs?after=0").json()
        assert first["entries"]
        cursor = first["cursor"]
        again = client.get(f"/api/v1/logs?after={cursor}").json()
        assert all(e not in first["entries"] for e in again["entries"])


class TestModelConfig:
    def test_put_then_get(self, client):
        payload = {
            "llm": {"kind": "llm", "endpoint": "https://llm.test/v1",
                    "model_name": "m", "auth_env_var": "LLM_KEY",
                    "timeout_ms": 5000},
        }
        put = client.put("/api/v1/config/models", json=payload)
        assert put.status_code == 200
        got = client.get("/api/v1/config/models").json()
        assert got["llm"]["model_name"] == "m"
        assert got["llm"]["auth_env_var"] == "LLM_KEY"

    def test_bad_endpoint_rejected(self, client):
        payload = {
            "llm": {"kind": "llm", "endpoint": "not-a-url",
                    "model_name": "m", "auth_env_var": "K"},
        }
        assert client.put("/api/v1/config/models", json=payload).status_code == 422


class TestCrashRestart:
    def test_trees_and_sessions_survive_restart(self, tmp_path):
        data_dir = tmp_path / "data"
        app1 = create_app(data_dir, gateway=MockGateway())
        with TestClient(app1) as c1:
            job = upload_csv(c1)
            tree_id = job["tree_ids"][0]
            tree_bytes = c1.get(f"/api/v1/trees/{tree_id}").content
            session_id = c1.post("/api/v1/sessions").json()["session_id"]
            c1.post(f"/api/v1/sessions/{session_id}/questions",
                    json={"question": "sum of Price"})
            session_doc = c1.get(f"/api/v1/sessions/{session_id}").json()

        app2 = create_app(data_dir, gateway=MockGateway())
        with TestClient(app2) as c2:
            assert c2.get(f"/api/v1/trees/{tree_id}").content == tree_bytes
            assert c2.get(f"/api/v1/sessions/{session_id}").json() == session_doc
            entries = c2.get("/api/v1/trees").json()
            assert entries[0]["tree_id"] == tree_id


class TestImageUploadJob:
    def test_image_file_extracted_via_vlm(self, tmp_path):
        gw = MockGateway(MockScript(completions={
            extract_tag("scan.png"): "Name\tScore\nalpha\t1\nbeta\t2",
        }))
        app = create_app(tmp_path / "data", gateway=gw)
        with TestClient(app) as client:
            resp = client.post(
                "/api/v1/jobs",
                files=[("files", ("scan.png", b"\x89PNG...", "image/png"))],
            )
            job = wait_for_job(client, resp.json()["job_id"])
            assert job["status"] == "succeeded"
            tree = client.get(f"/api/v1/trees/{job['tree_ids'][0]}").json()
            labels = {n["label"] for n in tree["nodes"].values()}
            assert {"Name", "Score", "alpha"} <= labels
