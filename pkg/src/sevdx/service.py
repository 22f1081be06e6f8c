"""HTTP service: single and batch prediction, ontology and health endpoints.

The model bundle is loaded once and shared read-only; reload swaps the whole
handle atomically. Batch rows are processed in input order and row failures
never affect later rows.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from . import corpusio
from .hierarchy import HierarchicalModel, Prediction
from .importance import word_importance
from .ontology import Ontology, default_ontology, load_ontology
from .segmenter import ALL_STYLES, RawReport, extract_final_diagnosis, split_parts


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    bundle_path: str | None = None
    ontology_path: str | None = None
    max_body_bytes: int = 1_000_000
    max_batch_rows: int = 10_000
    max_row_chars: int = 20_000

    def __post_init__(self):
        if self.max_body_bytes <= 0 or self.max_batch_rows <= 0 or self.max_row_chars <= 0:
            raise ValueError("service limits must be positive")


class _ModelHandle:
    """Versioned read-only holder; reload replaces the reference atomically."""

    def __init__(self, model: HierarchicalModel | None, ont: Ontology):
        self.model = model
        self.ontology = ont
        self.version = 1

    def swap(self, model: HierarchicalModel):
        self.model = model
        self.version += 1


def _pipeline_text(text: str) -> str:
    """extract section -> first specimen part (or whole text)."""
    report = RawReport(id="request", text=text)
    section = extract_final_diagnosis(report).report
    parts = split_parts(section, ALL_STYLES)
    return parts[0].text if parts else section.text


def _predict_payload(handle: _ModelHandle, text: str) -> dict:
    model = handle.model
    part_text = _pipeline_text(text)
    pred: Prediction = model.predict(part_text)
    importances = word_importance(model, part_text, pred)
    return {
        "input": text,
        "severities": [{"label": c, "probability": p} for c, p in pred.severities],
        "diagnoses": [
            {"label": n, "probability": p, "severity": s} for n, p, s in pred.diagnoses
        ],
        "no_prediction": pred.no_prediction,
        "importances": [{"token": t, "score": s} for t, s in importances],
        "bundle_version": corpusio.ENGINE_VERSION,
    }


def create_app(
    model: HierarchicalModel | None = None,
    ont: Ontology | None = None,
    config: ServiceConfig = ServiceConfig(),
) -> FastAPI:
    ont = ont or (load_ontology(config.ontology_path) if config.ontology_path else default_ontology())
    if model is None and config.bundle_path:
        model = corpusio.load_bundle(config.bundle_path, ont)
    handle = _ModelHandle(model, ont)

    app = FastAPI(title="sevdx", docs_url=None, redoc_url=None)
    app.state.handle = handle
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "model_loaded": handle.model is not None}

    @app.get("/api/ontology")
    def ontology():
        o = handle.ontology
        return {
            "version": o.version,
            "checksum": o.checksum,
            "severities": [
                {"code": s.code, "display_name": s.display_name} for s in o.severities
            ],
            "diagnoses": [{"name": d.name, "severity": d.severity} for d in o.diagnoses],
        }

    @app.post("/api/predict")
    async def predict(request: Request):
        body = await request.body()
        if len(body) > config.max_body_bytes:
            return JSONResponse({"error": "request body too large"}, status_code=413)
        if handle.model is None:
            return JSONResponse({"error": "model not loaded"}, status_code=503)
        try:
            payload = json.loads(body)
        except json.JSONDecodeError:
            return JSONResponse({"error": "body must be JSON"}, status_code=400)
        text = payload.get("text") if isinstance(payload, dict) else None
        if not isinstance(text, str) or not text.strip():
            return JSONResponse({"error": "missing or empty 'text'"}, status_code=400)
        return JSONResponse(_predict_payload(handle, text))

    @app.post("/api/batch")
    async def batch(request: Request):
        body = await request.body()
        if len(body) > config.max_body_bytes:
            return JSONResponse({"error": "request body too large"}, status_code=413)
        if handle.model is None:
            return JSONResponse({"error": "model not loaded"}, status_code=503)
        try:
            text = body.decode("utf-8")
        except UnicodeDecodeError:
            return JSONResponse({"error": "body must be UTF-8"}, status_code=400)
        rows = _parse_batch(text, handle.ontology, config)
        if isinstance(rows, Response):
            return rows

        def stream():
            for row in rows:
                if "error" in row:
                    record = row
                else:
                    try:
                        record = _predict_payload(handle, row["text"])
                        record["report_id"] = row["report_id"]
                        record["part_id"] = row["part_id"]
                    except Exception as exc:  # row isolation: keep streaming
                        record = {"report_id": row.get("report_id"), "error": str(exc)}
                yield json.dumps(record, ensure_ascii=False) + "\n"

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    return app


def _parse_batch(text: str, ont: Ontology, config: ServiceConfig):
    """CSV corpus or JSON-lines; per-row limit violations become error records."""
    stripped = text.lstrip()
    try:
        if stripped.startswith("{"):
            parts = corpusio.read_corpus_jsonl(text, ont)
        else:
            parts = corpusio.read_corpus_text(text, ont)
    except corpusio.CorpusError as exc:
        return JSONResponse({"error": f"unparseable batch: {exc}"}, status_code=400)
    if len(parts) > config.max_batch_rows:
        return JSONResponse({"error": "too many batch rows"}, status_code=413)
    rows = []
    for p in parts:
        if len(p.text) > config.max_row_chars:
            rows.append({"report_id": p.report_id, "part_id": p.part_id, "error": "row exceeds size limit"})
        else:
            rows.append({"report_id": p.report_id, "part_id": p.part_id, "text": p.text})
    return rows


def run(config: ServiceConfig):
    import uvicorn

    app = create_app(config=config)
    uvicorn.run(app, host=config.host, port=config.port)
