"""JSON HTTP API over the query engine.

Request bodies are parsed by hand instead of through framework models so
malformed JSON and bad field values both come back as plain 400s with a
one-line error body, which is what the web client renders.
"""

from __future__ import annotations

import json
import logging

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .config import ServiceConfig, build_engine
from .embed import EmbeddingError
from .evalsuite import QARecord, run_eval
from .pipeline import GenerationError, QueryEngine, RoutingError

log = logging.getLogger(__name__)

_STRATEGIES = ("auto", "wdi", "swi")


class _BadRequest(Exception):
    def __init__(self, message: str, status: int = 400):
        super().__init__(message)
        self.status = status


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


async def _json_body(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        raise _BadRequest("request body must be a JSON object")
    try:
        data = json.loads(raw)
    except ValueError:
        raise _BadRequest("request body must be valid JSON")
    if not isinstance(data, dict):
        raise _BadRequest("request body must be a JSON object")
    return data


def _parse_query_body(data: dict) -> tuple[str, str, int | None]:
    question = data.get("question")
    if not isinstance(question, str) or not question.strip():
        raise _BadRequest("question must be non-empty")
    strategy = data.get("strategy", "auto")
    if not isinstance(strategy, str) or strategy.lower() not in _STRATEGIES:
        raise _BadRequest(f"unknown strategy: {strategy}", status=404)
    k = data.get("k")
    if k is not None:
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise _BadRequest("k must be a positive integer")
    return question, strategy.lower(), k


def create_app(engine: QueryEngine) -> FastAPI:
    app = FastAPI(title="statrag", docs_url=None, redoc_url=None)
    # The web console is served from its own origin during development.
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    @app.post("/query")
    async def query(request: Request):
        try:
            data = await _json_body(request)
            question, strategy, k = _parse_query_body(data)
        except _BadRequest as exc:
            return _error(exc.status, str(exc))
        try:
            answer = engine.answer_query(question, strategy=strategy, k=k)
        except RoutingError as exc:
            return _error(400, str(exc))
        except (GenerationError, EmbeddingError) as exc:
            log.error("remote model failure: %s", exc)
            return _error(502, f"remote model failure: {exc}")
        except Exception as exc:
            log.exception("query failed")
            return _error(500, f"internal error: {exc}")
        return JSONResponse(content=answer.to_dict())

    @app.get("/health")
    async def health():
        return JSONResponse(content={
            "status": "ok",
            "chunks": engine.index.chunk_count,
            "partitions": engine.index.partition_count,
        })

    @app.get("/stats")
    async def stats():
        sizes = {j.label: n for j, n in sorted(
            engine.index.partition_sizes().items(), key=lambda kv: kv[0].label)}
        return JSONResponse(content={
            "chunks": engine.index.chunk_count,
            "partitions": sizes,
            "dim": engine.index.dim,
            "embedder_fingerprint": engine.index.embedder_fingerprint,
        })

    @app.post("/eval")
    async def eval_dataset(request: Request):
        try:
            data = await _json_body(request)
            raw_records = data.get("records")
            if not isinstance(raw_records, list) or not raw_records:
                raise _BadRequest("records must be a non-empty list")
            try:
                records = [QARecord(
                    id=str(r["id"]), question=r["question"],
                    reference_answer=r["reference_answer"],
                    expected_states=(tuple(r["expected_states"])
                                     if r.get("expected_states") is not None else None))
                    for r in raw_records]
            except (KeyError, TypeError, ValueError) as exc:
                raise _BadRequest(f"bad record: {exc}")
            ids = [r.id for r in records]
            if len(set(ids)) != len(ids):
                raise _BadRequest("record ids must be unique")
        except _BadRequest as exc:
            return _error(exc.status, str(exc))
        try:
            report = run_eval(records, engine)
        except (GenerationError, EmbeddingError) as exc:
            return _error(502, f"remote model failure: {exc}")
        except Exception as exc:
            log.exception("eval failed")
            return _error(500, f"internal error: {exc}")
        return JSONResponse(content=json.loads(report.to_json()))

    return app


def serve(config: ServiceConfig) -> None:
    """Build the engine, then block serving HTTP until signalled to stop."""
    import uvicorn

    engine = build_engine(config)
    app = create_app(engine)
    host, port = config.bind_host_port()
    log.info("serving on %s:%d (%d chunks, %d partitions)", host, port,
             engine.index.chunk_count, engine.index.partition_count)
    uvicorn.run(app, host=host, port=port, log_level="info")
