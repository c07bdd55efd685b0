"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class AskRequest(BaseModel):
    question: str = Field(min_length=1, max_length=4000)
    pipeline: Literal["agents", "rag"] = "agents"
    model_id: str | None = None
    session_id: str | None = None


class CitedArticle(BaseModel):
    chunk_id: str
    article_label: str
    excerpt: str


class AskResponse(BaseModel):
    answer: str
    outcome: str
    cited_articles: list[CitedArticle]
    run_id: str
    latency_ms: int
    session_id: str | None = None


class HealthResponse(BaseModel):
    status: str
    index_chunks: int
    models: list[str]
    pipelines: list[str]
