"""Statute loading and chunking.

Two chunking strategies: per-article splitting on the "Art." delimiter,
and fixed-size sliding character windows. Both preserve exact source
offsets so the original text can be reconstructed from the chunks.
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import DocumentDecodeError, EmptyDocumentError, NoArticleDelimiterWarning, ParameterError

DEFAULT_DELIMITER = "Art."


class ChunkStrategy(str, Enum):
    ARTICLE = "article"
    WINDOW = "window"


@dataclass(frozen=True)
class SourceDocument:
    doc_id: str
    text: str
    origin: str = ""


@dataclass(frozen=True)
class DocumentChunk:
    chunk_id: str
    doc_id: str
    text: str
    start_offset: int
    end_offset: int
    strategy: ChunkStrategy

    def to_dict(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "doc_id": self.doc_id,
            "text": self.text,
            "start_offset": self.start_offset,
            "end_offset": self.end_offset,
            "strategy": self.strategy.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentChunk":
        return cls(
            chunk_id=d["chunk_id"],
            doc_id=d["doc_id"],
            text=d["text"],
            start_offset=int(d["start_offset"]),
            end_offset=int(d["end_offset"]),
            strategy=ChunkStrategy(d["strategy"]),
        )


def normalize_text(raw: str) -> str:
    """Normalize line endings to LF; no other alteration."""
    return raw.replace("\r\n", "\n").replace("\r", "\n")


def load_document(path: str | Path, doc_id: str | None = None) -> SourceDocument:
    """Load a UTF-8 plain-text statute from disk.

    Line endings are normalized to LF. Decoding failures report the path
    and byte position; documents that are empty after stripping raise
    EmptyDocumentError.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DocumentDecodeError(str(path), 0, f"unreadable file: {exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DocumentDecodeError(str(path), exc.start, exc.reason) from exc
    text = normalize_text(text)
    if not text.strip():
        raise EmptyDocumentError(f"{path}: document is empty")
    return SourceDocument(doc_id=doc_id or path.stem, text=text, origin=str(path))


def _delimiter_positions(text: str, delimiter: str) -> list[int]:
    # case-sensitive, at a word boundary: start of text or preceded by whitespace
    positions = []
    for m in re.finditer(re.escape(delimiter), text):
        i = m.start()
        if i == 0 or text[i - 1].isspace():
            positions.append(i)
    return positions


def split_articles(doc: SourceDocument, delimiter: str = DEFAULT_DELIMITER) -> list[DocumentChunk]:
    """Split a document into one chunk per statute article.

    Every occurrence of `delimiter` at a word boundary starts a new chunk;
    non-whitespace text before the first delimiter is kept as a single
    preamble chunk. Whitespace-only leading text is absorbed into the
    first article chunk so that concatenating the chunks reproduces the
    source byte-for-byte. With no delimiter present the whole document is
    returned as one chunk and a NoArticleDelimiterWarning is emitted.
    """
    text = doc.text
    if not text:
        return []
    positions = _delimiter_positions(text, delimiter)
    if not positions:
        warnings.warn(
            f"no {delimiter!r} delimiter found in document {doc.doc_id!r}",
            NoArticleDelimiterWarning,
            stacklevel=2,
        )
        starts = [0]
    else:
        starts = list(positions)
        if positions[0] > 0:
            if text[: positions[0]].strip():
                starts = [0] + starts  # preamble chunk
            else:
                starts[0] = 0  # leading whitespace belongs to the first article
    bounds = list(zip(starts, starts[1:] + [len(text)]))
    return [
        DocumentChunk(
            chunk_id=f"{doc.doc_id}:art:{i:04d}",
            doc_id=doc.doc_id,
            text=text[a:b],
            start_offset=a,
            end_offset=b,
            strategy=ChunkStrategy.ARTICLE,
        )
        for i, (a, b) in enumerate(bounds)
    ]


def sliding_window_bounds(length: int, chunk_size: int, overlap: int) -> list[tuple[int, int]]:
    """Window offsets for a text of `length` characters.

    Windows start at multiples of step = chunk_size - overlap; the last
    window is the first one whose end reaches the end of the text.
    """
    if chunk_size < 1:
        raise ParameterError(f"chunk_size must be >= 1, got {chunk_size}")
    if overlap < 0 or overlap >= chunk_size:
        raise ParameterError(f"need 0 <= overlap < chunk_size, got overlap={overlap}, chunk_size={chunk_size}")
    if length <= 0:
        return []
    step = chunk_size - overlap
    if length <= chunk_size:
        count = 1
    else:
        count = -(-(length - chunk_size) // step) + 1  # ceil division
    return [(i * step, min(i * step + chunk_size, length)) for i in range(count)]


def split_sliding(
    doc: SourceDocument, chunk_size: int = 512, overlap: int = 256
) -> list[DocumentChunk]:
    """Split a document into overlapping character windows."""
    bounds = sliding_window_bounds(len(doc.text), chunk_size, overlap)
    return [
        DocumentChunk(
            chunk_id=f"{doc.doc_id}:win:{i:04d}",
            doc_id=doc.doc_id,
            text=doc.text[a:b],
            start_offset=a,
            end_offset=b,
            strategy=ChunkStrategy.WINDOW,
        )
        for i, (a, b) in enumerate(bounds)
    ]


def split_document(
    doc: SourceDocument,
    strategy: ChunkStrategy,
    chunk_size: int = 512,
    overlap: int = 256,
    delimiter: str = DEFAULT_DELIMITER,
) -> list[DocumentChunk]:
    if strategy is ChunkStrategy.ARTICLE:
        return split_articles(doc, delimiter=delimiter)
    return split_sliding(doc, chunk_size=chunk_size, overlap=overlap)


def write_chunks_jsonl(chunks: list[DocumentChunk], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(json.dumps(chunk.to_dict(), ensure_ascii=False) + "\n")


def read_chunks_jsonl(path: str | Path) -> list[DocumentChunk]:
    chunks = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                chunks.append(DocumentChunk.from_dict(json.loads(line)))
    return chunks
