"""Embedding clients: a remote HTTP backend and a deterministic offline stub.

All vectors leave this module L2-normalized so that cosine similarity in
the index reduces to a dot product.
"""

from __future__ import annotations

import hashlib
import os
import time
from dataclasses import dataclass, field

import httpx
import numpy as np

from .errors import DimensionMismatchError, EmbeddingError, EmptyTextError, ParameterError, TransportError

EMBED_TOKEN_ENV = "LEXCREW_EMBED_TOKEN"

# The E5 family expects these asymmetric prefixes even though most write-ups
# omit them; both are overridable in EmbedderConfig.
DEFAULT_QUERY_PREFIX = "query: "
DEFAULT_PASSAGE_PREFIX = "passage: "


@dataclass(frozen=True)
class EmbedderConfig:
    endpoint_url: str = ""
    model_id: str = "intfloat/multilingual-e5-base"
    query_prefix: str = DEFAULT_QUERY_PREFIX
    passage_prefix: str = DEFAULT_PASSAGE_PREFIX
    timeout_ms: int = 30_000
    max_batch: int = 64

    def __post_init__(self):
        if self.max_batch < 1:
            raise ParameterError("max_batch must be >= 1")
        if self.timeout_ms <= 0:
            raise ParameterError("timeout must be > 0")


@dataclass(frozen=True)
class EmbeddingVector:
    values: tuple[float, ...]
    dim: int
    model_id: str

    def __post_init__(self):
        if len(self.values) != self.dim:
            raise DimensionMismatchError(f"{len(self.values)} values for dim {self.dim}")
        arr = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise EmbeddingError("vector contains NaN/Inf")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=np.float64)


def _normalized(values: np.ndarray, model_id: str) -> EmbeddingVector:
    norm = float(np.linalg.norm(values))
    if norm == 0.0:
        raise EmbeddingError("zero vector cannot be normalized")
    unit = values / norm
    return EmbeddingVector(values=tuple(float(v) for v in unit), dim=len(unit), model_id=model_id)


def stub_embed(text: str, dim: int, model_id: str = "stub-3gram") -> EmbeddingVector:
    """Deterministic test-double embedding from hashed character 3-grams.

    Each 3-gram of the sentinel-padded text adds ±1 to two hashed slots, so
    texts sharing many 3-grams end up with a higher cosine than unrelated
    texts. Identical texts map to bit-identical vectors.
    """
    if dim < 2:
        raise ParameterError("dim must be >= 2")
    vec = np.zeros(dim, dtype=np.float64)
    padded = f"\x02\x02{text}\x03\x03"
    for i in range(len(padded) - 2):
        digest = hashlib.blake2b(padded[i : i + 3].encode("utf-8"), digest_size=8).digest()
        a = int.from_bytes(digest[:4], "little")
        b = int.from_bytes(digest[4:], "little")
        vec[a % dim] += 1.0 if a & 0x8000_0000 else -1.0
        vec[b % dim] += 1.0 if b & 0x8000_0000 else -1.0
    if not vec.any():
        vec[len(text) % dim] = 1.0
    return _normalized(vec, model_id)


class StubEmbedder:
    """Offline embedder; queries and passages share one space (no prefixes)."""

    def __init__(self, dim: int = 64, model_id: str = "stub-3gram"):
        if dim < 2:
            raise ParameterError("dim must be >= 2")
        self.dim = dim
        self.model_id = model_id

    def embed_passages(self, texts: list[str]) -> list[EmbeddingVector]:
        _check_texts(texts)
        return [stub_embed(t, self.dim, self.model_id) for t in texts]

    def embed_query(self, text: str) -> EmbeddingVector:
        return self.embed_passages([text])[0]


def _check_texts(texts: list[str]) -> None:
    if not texts:
        raise EmptyTextError("no texts to embed")
    for i, t in enumerate(texts):
        if not t.strip():
            raise EmptyTextError(f"text #{i} is empty after trimming")


@dataclass
class _RetryPolicy:
    attempts: int = 3
    backoff_ms: int = 250
    sleep: object = field(default=time.sleep, repr=False)


class HttpEmbedder:
    """Client for an embeddings endpoint speaking the de-facto JSON shape:

        POST {"model": ..., "input": [...]} -> {"data": [{"embedding": [...]}]}

    The vector dimension is discovered from the first response and pinned;
    a later mismatch is a hard error.
    """

    def __init__(
        self,
        cfg: EmbedderConfig,
        client: httpx.Client | None = None,
        retry: _RetryPolicy | None = None,
    ):
        self.cfg = cfg
        self.model_id = cfg.model_id
        self.dim: int | None = None
        self._retry = retry or _RetryPolicy()
        self._client = client or httpx.Client(timeout=cfg.timeout_ms / 1000.0)

    def embed_passages(self, texts: list[str]) -> list[EmbeddingVector]:
        _check_texts(texts)
        return self._embed([self.cfg.passage_prefix + t for t in texts])

    def embed_query(self, text: str) -> EmbeddingVector:
        _check_texts([text])
        return self._embed([self.cfg.query_prefix + text])[0]

    def _embed(self, inputs: list[str]) -> list[EmbeddingVector]:
        out: list[EmbeddingVector] = []
        for start in range(0, len(inputs), self.cfg.max_batch):
            batch = inputs[start : start + self.cfg.max_batch]
            data = self._post({"model": self.cfg.model_id, "input": batch})
            rows = data.get("data")
            if not isinstance(rows, list) or len(rows) != len(batch):
                raise EmbeddingError(f"service returned {len(rows or [])} vectors for {len(batch)} inputs")
            for row in rows:
                values = np.asarray(row["embedding"], dtype=np.float64)
                if not np.all(np.isfinite(values)):
                    raise EmbeddingError("service returned a non-finite vector")
                if self.dim is None:
                    self.dim = len(values)
                elif len(values) != self.dim:
                    raise DimensionMismatchError(f"got dim {len(values)}, index pinned to {self.dim}")
                out.append(_normalized(values, self.cfg.model_id))
        return out

    def _post(self, payload: dict) -> dict:
        headers = {}
        token = os.environ.get(EMBED_TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        last_error: Exception | None = None
        for attempt in range(self._retry.attempts):
            if attempt:
                self._retry.sleep(self._retry.backoff_ms / 1000.0 * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.cfg.endpoint_url, json=payload, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if resp.status_code == 200:
                return resp.json()
            if resp.status_code == 429 or resp.status_code >= 500:
                last_error = TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
                continue
            raise TransportError(f"HTTP {resp.status_code}: {resp.text[:200]}")
        raise TransportError(f"embedding request failed after {self._retry.attempts} attempts: {last_error}")
