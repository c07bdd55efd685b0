"""Match article numbers cited in an answer against retrieved chunks."""

from __future__ import annotations

import re

from .index import RetrievalResult, VectorIndex

# "Art. 129", "Art 477", "artigo 58-A", with optional ordinal marker on the number
_ARTICLE_REF = re.compile(r"\b[Aa]rt(?:igo)?\.?\s*(\d+(?:-[A-Za-z])?)\s*[ºo°]?", re.UNICODE)


def article_label(chunk_text: str) -> str | None:
    """Label of the article a chunk opens with, e.g. "Art. 129"."""
    m = _ARTICLE_REF.search(chunk_text[:80])
    return f"Art. {m.group(1)}" if m else None


def article_numbers(text: str) -> set[str]:
    return {m.group(1).upper() for m in _ARTICLE_REF.finditer(text)}


def referenced_chunk_ids(answer: str, result: RetrievalResult, index: VectorIndex) -> list[str]:
    """Retrieved chunk ids whose article number the answer actually cites.

    Falls back to the full retrieved list (provenance) when the answer
    cites nothing recognizable, so the citation list is never fabricated
    and always a subset of the retrieval hits.
    """
    cited = article_numbers(answer)
    if not cited:
        return result.chunk_ids()
    keep = []
    for hit in result.hits:
        label = article_label(index.text_of(hit.chunk_id))
        if label and label.split(" ", 1)[1].upper() in cited:
            keep.append(hit.chunk_id)
    return keep or result.chunk_ids()


def excerpt(text: str, limit: int = 240) -> str:
    flat = " ".join(text.split())
    return flat if len(flat) <= limit else flat[: limit - 1].rstrip() + "…"
