"""Chat-completion clients: an OpenAI-compatible HTTP backend and a
scripted deterministic backend for offline tests.

Every completion, successful or not, lands in the client's transcript;
pipeline tests assert call budgets and agent attribution from it.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Sequence

import httpx

from .errors import (
    ContextLengthError,
    EmptyCompletionError,
    ParameterError,
    TransportError,
    UnscriptedPromptError,
)

LLM_TOKEN_ENV = "LEXCREW_LLM_TOKEN"


class Role(str, Enum):
    SYSTEM = "system"
    USER = "user"
    ASSISTANT = "assistant"


@dataclass(frozen=True)
class ChatMessage:
    role: Role
    content: str

    def __post_init__(self):
        if self.role in (Role.SYSTEM, Role.USER) and not self.content:
            raise ParameterError(f"{self.role.value} message must have content")

    def to_dict(self) -> dict:
        return {"role": self.role.value, "content": self.content}

    @classmethod
    def from_dict(cls, d: dict) -> "ChatMessage":
        return cls(role=Role(d["role"]), content=d["content"])


def system(content: str) -> ChatMessage:
    return ChatMessage(Role.SYSTEM, content)


def user(content: str) -> ChatMessage:
    return ChatMessage(Role.USER, content)


@dataclass(frozen=True)
class LlmConfig:
    endpoint_url: str = ""
    model_id: str = "scripted"
    temperature: float = 0.0
    max_tokens: int = 1024
    timeout_ms: int = 60_000

    def __post_init__(self):
        if self.max_tokens < 1:
            raise ParameterError("max_tokens must be >= 1")
        if self.temperature < 0:
            raise ParameterError("temperature must be >= 0")


@dataclass
class CompletionResult:
    text: str
    usage: dict | None = None


@dataclass
class TranscriptEntry:
    ts: float
    agent: str
    model_id: str
    messages: list[dict]
    reply: str | None
    error: str | None = None
    latency_ms: int = 0
    usage: dict | None = None

    def to_dict(self) -> dict:
        d = {
            "ts": self.ts,
            "agent": self.agent,
            "model_id": self.model_id,
            "messages": self.messages,
            "reply": self.reply,
        }
        if self.error is not None:
            d["error"] = self.error
        d["latency_ms"] = self.latency_ms
        if self.usage is not None:
            d["usage"] = self.usage
        return d


Matcher = "str | Callable[[str], bool]"
Reply = "str | Callable[[Sequence[ChatMessage]], str]"


class ScriptedBackend:
    """Deterministic backend: first matching script entry wins.

    A matcher is a substring of the concatenated prompt text or a
    predicate over it; a reply is a fixed string or a function of the
    messages. With strict=True an unmatched prompt fails loudly.
    """

    def __init__(self, script: Sequence[tuple], strict: bool = True, default_reply: str = ""):
        self.script = list(script)
        self.strict = strict
        self.default_reply = default_reply
        self.calls = 0

    @staticmethod
    def prompt_text(messages: Sequence[ChatMessage]) -> str:
        return "\n".join(m.content for m in messages)

    def send(self, cfg: LlmConfig, messages: Sequence[ChatMessage]) -> CompletionResult:
        self.calls += 1
        text = self.prompt_text(messages)
        for matcher, reply in self.script:
            matched = matcher(text) if callable(matcher) else (matcher in text)
            if matched:
                return CompletionResult(reply(messages) if callable(reply) else reply)
        if self.strict:
            raise UnscriptedPromptError(f"no script entry matches prompt: {text[:160]!r}")
        return CompletionResult(self.default_reply)


class HttpChatBackend:
    """OpenAI-compatible chat completions over HTTP, with bounded retries."""

    def __init__(self, client: httpx.Client | None = None, attempts: int = 3, backoff_ms: int = 250, sleep=time.sleep):
        self._client = client or httpx.Client()
        self._attempts = attempts
        self._backoff_ms = backoff_ms
        self._sleep = sleep

    def send(self, cfg: LlmConfig, messages: Sequence[ChatMessage]) -> CompletionResult:
        payload = {
            "model": cfg.model_id,
            "messages": [m.to_dict() for m in messages],
            "temperature": cfg.temperature,
            "max_tokens": cfg.max_tokens,
        }
        headers = {}
        token = os.environ.get(LLM_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last_error: Exception | None = None
        for attempt in range(self._attempts):
            if attempt:
                self._sleep(self._backoff_ms / 1000.0 * 2 ** (attempt - 1))
            try:
                resp = self._client.post(
                    cfg.endpoint_url, json=payload, headers=headers, timeout=cfg.timeout_ms / 1000.0
                )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code == 200:
                body = resp.json()
                try:
                    text = body["choices"][0]["message"]["content"]
                except (KeyError, IndexError, TypeError) as exc:
                    raise TransportError(f"malformed completion body: {exc}") from exc
                return CompletionResult(text or "", usage=body.get("usage"))
            if resp.status_code == 400 and "context_length" in resp.text:
                raise ContextLengthError(resp.text[:300])
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        raise TransportError(f"completion failed after {self._attempts} attempts: {last_error}")


class ChatClient:
    """One backend + one transcript. Pipelines create a client per run so
    transcripts of concurrent runs never interleave."""

    def __init__(self, backend, cfg: LlmConfig):
        self.backend = backend
        self.cfg = cfg
        self.transcript: list[TranscriptEntry] = []

    def complete(self, messages: Sequence[ChatMessage], agent: str = "") -> str:
        started = time.monotonic()
        entry = TranscriptEntry(
            ts=time.time(),
            agent=agent,
            model_id=self.cfg.model_id,
            messages=[m.to_dict() for m in messages],
            reply=None,
        )
        self.transcript.append(entry)
        try:
            if not messages:
                raise ParameterError("messages must be non-empty")
            if messages[-1].role is not Role.USER:
                raise ParameterError("last message must have role user")
            result = self.backend.send(self.cfg, messages)
            if not result.text.strip():
                raise EmptyCompletionError("backend returned an empty completion")
            entry.reply = result.text
            entry.usage = result.usage
            return result.text
        except Exception as exc:
            entry.error = f"{type(exc).__name__}: {exc}"
            raise
        finally:
            entry.latency_ms = int((time.monotonic() - started) * 1000)
