"""Exact cosine top-k retrieval over chunk embeddings.

The statute yields on the order of a thousand chunks, so the index is a
plain float32 matrix scanned exactly; no approximate structures. Rows are
unit-norm, making the cosine a dot product.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import DocumentChunk
from .embed import EmbeddingVector
from .errors import (
    DimensionMismatchError,
    DuplicateIdError,
    EmptyCorpusError,
    IndexFormatError,
    ParameterError,
    UnknownChunkError,
)

_F32 = np.dtype("<f4")  # little-endian on disk and in memory
DEFAULT_TOP_K = 20
DEFAULT_SEPARATOR = "\n\n"


@dataclass(frozen=True)
class ChunkRef:
    chunk_id: str
    text: str


@dataclass(frozen=True)
class Hit:
    chunk_id: str
    score: float


@dataclass(frozen=True)
class RetrievalResult:
    hits: tuple[Hit, ...]
    k_requested: int

    def chunk_ids(self) -> list[str]:
        return [h.chunk_id for h in self.hits]


class VectorIndex:
    """Immutable matrix of unit-norm chunk embeddings plus their texts."""

    def __init__(self, vectors: np.ndarray, chunk_refs: list[ChunkRef], model_id: str):
        vectors = np.ascontiguousarray(vectors, dtype=_F32)
        if vectors.ndim != 2:
            raise IndexFormatError("vectors must be a 2-D matrix")
        if vectors.shape[0] != len(chunk_refs):
            raise IndexFormatError(f"{vectors.shape[0]} rows for {len(chunk_refs)} chunk refs")
        if vectors.shape[0] == 0:
            raise EmptyCorpusError("index must hold at least one chunk")
        norms = np.linalg.norm(vectors.astype(np.float64), axis=1)
        if not np.all(np.abs(norms - 1.0) < 1e-5):
            raise IndexFormatError("index rows must be unit-norm")
        ids = [ref.chunk_id for ref in chunk_refs]
        if len(set(ids)) != len(ids):
            raise DuplicateIdError("duplicate chunk_id in index")
        vectors.setflags(write=False)
        self._vectors = vectors
        self._chunk_refs = tuple(chunk_refs)
        self._by_id = {ref.chunk_id: ref for ref in chunk_refs}
        self.model_id = model_id
        self.metric = "cosine"

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def chunk_refs(self) -> tuple[ChunkRef, ...]:
        return self._chunk_refs

    @property
    def dim(self) -> int:
        return int(self._vectors.shape[1])

    def __len__(self) -> int:
        return int(self._vectors.shape[0])

    def text_of(self, chunk_id: str) -> str:
        try:
            return self._by_id[chunk_id].text
        except KeyError:
            raise UnknownChunkError(f"chunk_id {chunk_id!r} not in index") from None

    # persistence: <name>.idx.json header + <name>.idx.f32 row-major matrix

    def save(self, name: str | Path) -> None:
        name = Path(name)
        header = {
            "dim": self.dim,
            "n": len(self),
            "model_id": self.model_id,
            "metric": self.metric,
            "chunk_refs": [{"chunk_id": r.chunk_id, "text": r.text} for r in self._chunk_refs],
        }
        name.with_suffix(name.suffix + ".idx.json").write_text(
            json.dumps(header, ensure_ascii=False), encoding="utf-8"
        )
        name.with_suffix(name.suffix + ".idx.f32").write_bytes(self._vectors.tobytes(order="C"))

    @classmethod
    def load(cls, name: str | Path) -> "VectorIndex":
        name = Path(name)
        header_path = name.with_suffix(name.suffix + ".idx.json")
        matrix_path = name.with_suffix(name.suffix + ".idx.f32")
        try:
            header = json.loads(header_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise IndexFormatError(f"cannot read index header {header_path}: {exc}") from exc
        try:
            raw = matrix_path.read_bytes()
        except OSError as exc:
            raise IndexFormatError(f"cannot read index matrix {matrix_path}: {exc}") from exc
        n, dim = int(header["n"]), int(header["dim"])
        if len(raw) != n * dim * 4:
            raise IndexFormatError(f"matrix file holds {len(raw)} bytes, expected {n * dim * 4}")
        vectors = np.frombuffer(raw, dtype=_F32).reshape(n, dim)
        refs = [ChunkRef(r["chunk_id"], r["text"]) for r in header["chunk_refs"]]
        return cls(vectors, refs, header["model_id"])


def build_index(chunks: list[DocumentChunk], embedder) -> VectorIndex:
    """Embed every chunk and assemble the immutable index.

    Chunk text is display-trimmed before it is surfaced to the index;
    offsets in the source chunks stay untouched. Any embedding failure
    aborts the build: no partial index is ever returned.
    """
    if not chunks:
        raise EmptyCorpusError("no chunks to index")
    ids = [c.chunk_id for c in chunks]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateIdError(f"duplicate chunk_id(s): {dupes[:5]}")
    texts = [c.text.strip() for c in chunks]
    vectors = embedder.embed_passages(texts)
    dims = {v.dim for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed dims in batch: {sorted(dims)}")
    matrix = np.stack([v.as_array() for v in vectors]).astype(_F32)
    refs = [ChunkRef(c.chunk_id, t) for c, t in zip(chunks, texts)]
    return VectorIndex(matrix, refs, embedder.model_id)


def search_topk(index: VectorIndex, query: EmbeddingVector, k: int = DEFAULT_TOP_K) -> RetrievalResult:
    """Exact top-k by dot product; ties broken by ascending insertion order."""
    if k < 1:
        raise ParameterError("k must be >= 1")
    if query.dim != index.dim:
        raise DimensionMismatchError(f"query dim {query.dim} != index dim {index.dim}")
    q = np.asarray(query.values, dtype=_F32)
    scores = index.vectors @ q
    top = np.argsort(-scores, kind="stable")[: min(k, len(index))]
    hits = tuple(Hit(index.chunk_refs[i].chunk_id, float(scores[i])) for i in top)
    return RetrievalResult(hits=hits, k_requested=k)


def assemble_context(index: VectorIndex, result: RetrievalResult, separator: str = DEFAULT_SEPARATOR) -> str:
    """Join hit texts in score order, best first."""
    return separator.join(index.text_of(h.chunk_id) for h in result.hits)


@dataclass
class RetrievalCall:
    query: str
    chunk_ids: list[str]


class Retriever:
    """Embed a question, search, and assemble the context in one call.

    Keeps a log of calls so pipelines can attribute tool use.
    """

    def __init__(self, index: VectorIndex, embedder, k: int = DEFAULT_TOP_K, separator: str = DEFAULT_SEPARATOR):
        self.index = index
        self.embedder = embedder
        self.k = k
        self.separator = separator
        self.calls: list[RetrievalCall] = []

    def retrieve(self, question: str) -> tuple[str, RetrievalResult]:
        query = self.embedder.embed_query(question)
        result = search_topk(self.index, query, self.k)
        self.calls.append(RetrievalCall(query=question, chunk_ids=result.chunk_ids()))
        return assemble_context(self.index, result, self.separator), result
