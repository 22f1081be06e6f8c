import json

import pytest
from fastapi.testclient import TestClient

from sevdx import corpusio
from sevdx.service import ServiceConfig, create_app


@pytest.fixture(scope="module")
def client(hier_model, ont):
    app = create_app(model=hier_model, ont=ont,
                     config=ServiceConfig(max_body_bytes=50_000, max_batch_rows=100))
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def empty_client(ont):
    app = create_app(model=None, ont=ont)
    with TestClient(app) as c:
        yield c


def test_healthz(client):
    body = client.get("/healthz").json()
    assert body == {"status": "ok", "model_loaded": True}


def test_ontology_endpoint(client, ont):
    body = client.get("/api/ontology").json()
    assert body["checksum"] == ont.checksum
    assert [s["code"] for s in body["severities"]] == ont.severity_codes
    assert [d["name"] for d in body["diagnoses"]] == ont.diagnosis_names
    for d in body["diagnoses"]:
        assert d["severity"] in ont.severity_codes


def test_predict_contract_and_determinism(client, small_corpus):
    text = next(p.text for p in small_corpus if p.gold_diagnoses)
    r1 = client.post("/api/predict", json={"text": text})
    assert r1.status_code == 200
    body = r1.json()
    assert body["input"] == text
    assert isinstance(body["no_prediction"], bool)
    for s in body["severities"]:
        assert 0.0 <= s["probability"] <= 1.0
    for d in body["diagnoses"]:
        assert {"label", "probability", "severity"} <= set(d)
    for imp in body["importances"]:
        assert {"token", "score"} <= set(imp)
    r2 = client.post("/api/predict", json={"text": text})
    assert r2.json() == body


def test_predict_applies_section_extraction(client):
    r = client.post("/api/predict", json={"text": "FINAL DIAGNOSIS:\nA. cyst fluid\nCOMMENT: x"})
    assert r.status_code == 200


def test_predict_400_on_bad_input(client):
    assert client.post("/api/predict", content=b"not json").status_code == 400
    assert client.post("/api/predict", json={"nope": 1}).status_code == 400
    assert client.post("/api/predict", json={"text": "   "}).status_code == 400


def test_predict_413_on_oversized_body(client):
    big = "x" * 60_000
    assert client.post("/api/predict", json={"text": big}).status_code == 413


def test_predict_503_without_model(empty_client):
    r = empty_client.post("/api/predict", json={"text": "hello"})
    assert r.status_code == 503
    assert empty_client.get("/healthz").json()["model_loaded"] is False


def test_batch_preserves_order_and_ids(client, small_corpus):
    parts = small_corpus[:10]
    payload = corpusio.write_corpus_text(list(parts))
    r = client.post("/api/batch", content=payload.encode("utf-8"))
    assert r.status_code == 200
    rows = [json.loads(line) for line in r.text.strip().splitlines()]
    assert [(row["report_id"], row["part_id"]) for row in rows] == [
        (p.report_id, p.part_id) for p in parts
    ]


def test_batch_jsonl_input(client):
    payload = "\n".join([
        json.dumps({"report_id": "r1", "part_id": "A", "text": "benign cyst fluid"}),
        json.dumps({"report_id": "r2", "part_id": "A", "text": "negative for malignancy"}),
    ])
    r = client.post("/api/batch", content=payload.encode("utf-8"))
    rows = [json.loads(line) for line in r.text.strip().splitlines()]
    assert [row["report_id"] for row in rows] == ["r1", "r2"]


def test_batch_row_isolation(client):
    # row 2 exceeds the per-row limit; rows 1 and 3 must still succeed
    payload = "\n".join([
        json.dumps({"report_id": "ok1", "text": "cyst"}),
        json.dumps({"report_id": "bad", "text": "y" * 25_000}),
        json.dumps({"report_id": "ok2", "text": "fibroadenoma"}),
    ])
    r = client.post("/api/batch", content=payload.encode("utf-8"))
    rows = [json.loads(line) for line in r.text.strip().splitlines()]
    assert len(rows) == 3
    assert "error" not in rows[0] and "error" not in rows[2]
    assert rows[1]["report_id"] == "bad" and "error" in rows[1]


def test_batch_unparseable_400(client):
    r = client.post("/api/batch", content=b"report_id,wrong,header\n1,2,3\n")
    assert r.status_code == 400


def test_batch_too_many_rows_413(client, small_corpus):
    parts = (small_corpus * 2)[:150]
    # reindex to avoid duplicate report/part pairs
    parts = [corpusio.LabeledPart(f"r{i}", "A", p.text, p.gold_diagnoses) for i, p in enumerate(parts)]
    payload = corpusio.write_corpus_text(parts)
    assert client.post("/api/batch", content=payload.encode("utf-8")).status_code == 413


def test_no_prediction_field_present(client):
    # gibberish far from any training text may or may not predict; the field must exist
    body = client.post("/api/predict", json={"text": "zzz qqq vvv"}).json()
    assert "no_prediction" in body
    assert body["no_prediction"] == (len(body["severities"]) == 0)


def test_cors_headers(client):
    r = client.options(
        "/api/predict",
        headers={"Origin": "http://localhost:5173", "Access-Control-Request-Method": "POST"},
    )
    assert r.headers.get("access-control-allow-origin") == "*"
