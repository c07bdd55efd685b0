"""HTTP service exposing the Q&A pipelines.

POST /api/ask        run a pipeline synchronously
GET  /api/health     liveness + loaded-index report
GET  /api/runs/{id}  full stored record of an earlier run
"""

from __future__ import annotations

import threading
import uuid
from collections import OrderedDict
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..agents import Outcome, PipelineRun
from ..citations import article_label, excerpt
from ..engine import PIPELINES, QaEngine
from ..errors import ConfigError, LexcrewError
from .schemas import AskRequest, AskResponse, CitedArticle, HealthResponse

MAX_STORED_RUNS = 1000


class RunStore:
    """Bounded, thread-safe store of finished runs, keyed by run_id."""

    def __init__(self, capacity: int = MAX_STORED_RUNS):
        self._runs: OrderedDict[str, dict] = OrderedDict()
        self._capacity = capacity
        self._lock = threading.Lock()

    def put(self, run_id: str, payload: dict) -> None:
        with self._lock:
            self._runs[run_id] = payload
            while len(self._runs) > self._capacity:
                self._runs.popitem(last=False)

    def get(self, run_id: str) -> dict | None:
        with self._lock:
            return self._runs.get(run_id)


def create_app(engine: QaEngine | None, cors_origins: list[str] | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="lexcrew", version="0.1.0")
    app.state.engine = engine
    app.state.runs = RunStore()

    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def invalid_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": jsonable_encoder(exc.errors())})

    def citations_of(run: PipelineRun) -> list[CitedArticle]:
        index = app.state.engine.agents_index if run.pipeline == "agents" else app.state.engine.index
        cited = []
        for chunk_id in run.cited_articles:
            text = index.text_of(chunk_id)
            cited.append(
                CitedArticle(
                    chunk_id=chunk_id,
                    article_label=article_label(text) or chunk_id,
                    excerpt=excerpt(text),
                )
            )
        return cited

    @app.post("/api/ask", response_model=AskResponse)
    def ask(req: AskRequest):
        if not req.question.strip():
            raise HTTPException(status_code=400, detail="question must not be blank")
        if app.state.engine is None:
            raise HTTPException(status_code=503, detail="index not loaded")
        try:
            run = app.state.engine.ask(req.question, pipeline=req.pipeline, model_id=req.model_id)
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except LexcrewError as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        run_id = uuid.uuid4().hex
        payload = {"run_id": run_id, **run.to_dict()}
        app.state.runs.put(run_id, payload)
        if run.outcome is Outcome.FAILED:
            raise HTTPException(status_code=502, detail=run.error or "pipeline failed")
        response = AskResponse(
            answer=run.final_answer,
            outcome=run.outcome.value,
            cited_articles=citations_of(run) if run.outcome is Outcome.ANSWERED else [],
            run_id=run_id,
            latency_ms=run.wall_time_ms,
            session_id=req.session_id,
        )
        if run.outcome is Outcome.OFF_TOPIC:
            return JSONResponse(status_code=422, content=jsonable_encoder(response))
        return response

    @app.get("/api/health", response_model=HealthResponse)
    def health():
        engine = app.state.engine
        return HealthResponse(
            status="ok" if engine is not None else "degraded",
            index_chunks=engine.n_chunks if engine is not None else 0,
            models=engine.model_ids() if engine is not None else [],
            pipelines=list(PIPELINES),
        )

    @app.get("/api/runs/{run_id}")
    def get_run(run_id: str):
        payload = app.state.runs.get(run_id)
        if payload is None:
            raise HTTPException(status_code=404, detail=f"unknown run_id {run_id!r}")
        return payload

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
