import json

import httpx
import numpy as np
import pytest

from lexcrew.embed import (
    EmbedderConfig,
    EmbeddingVector,
    HttpEmbedder,
    StubEmbedder,
    _RetryPolicy,
    stub_embed,
)
from lexcrew.errors import (
    DimensionMismatchError,
    EmbeddingError,
    EmptyTextError,
    ParameterError,
    TransportError,
)


# stub -----------------------------------------------------------------


def test_stub_deterministic():
    assert stub_embed("x", 8) == stub_embed("x", 8)


def test_stub_norm():
    v = stub_embed("x", 8)
    assert abs(np.linalg.norm(v.as_array()) - 1.0) < 1e-9


def test_stub_ngram_similarity_ordering():
    # derived by evaluating the three cosines with the built stub
    a = stub_embed("aaaa", 8).as_array()
    b = stub_embed("aaab", 8).as_array()
    z = stub_embed("zzzz", 8).as_array()
    assert float(a @ b) > float(a @ z)


def test_stub_min_dim():
    with pytest.raises(ParameterError):
        stub_embed("x", 1)


def test_stub_embedder_batch_order_and_purity():
    emb = StubEmbedder(dim=16)
    vecs = emb.embed_passages(["a", "b", "a"])
    assert vecs[0] == vecs[2]
    assert vecs[0] != vecs[1]
    assert all(v.dim == 16 for v in vecs)


def test_stub_embedder_query_equals_passage_space():
    emb = StubEmbedder(dim=16)
    assert emb.embed_query("férias") == emb.embed_passages(["férias"])[0]


def test_empty_text_rejected():
    emb = StubEmbedder(dim=8)
    with pytest.raises(EmptyTextError):
        emb.embed_query("")
    with pytest.raises(EmptyTextError):
        emb.embed_passages(["ok", "   "])
    with pytest.raises(EmptyTextError):
        emb.embed_passages([])


def test_vector_invariants():
    with pytest.raises(DimensionMismatchError):
        EmbeddingVector(values=(1.0, 0.0), dim=3, model_id="m")
    with pytest.raises(EmbeddingError):
        EmbeddingVector(values=(float("nan"), 0.0), dim=2, model_id="m")


# http client ----------------------------------------------------------


def service(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def echo_service(dim=4, record=None):
    def handler(request):
        payload = json.loads(request.content)
        if record is not None:
            record.append(payload)
        data = [{"embedding": [float(len(t))] + [1.0] * (dim - 1)} for t in payload["input"]]
        return httpx.Response(200, json={"data": data})

    return handler


def test_http_embedder_prefixes_and_normalization():
    seen = []
    emb = HttpEmbedder(EmbedderConfig(endpoint_url="http://svc/embed"), client=service(echo_service(record=seen)))
    vecs = emb.embed_passages(["abc"])
    assert seen[0]["input"] == ["passage: abc"]
    assert abs(np.linalg.norm(vecs[0].as_array()) - 1.0) < 1e-6
    emb.embed_query("abc")
    assert seen[1]["input"] == ["query: abc"]


def test_http_embedder_batching():
    seen = []
    cfg = EmbedderConfig(endpoint_url="http://svc/embed", max_batch=2)
    emb = HttpEmbedder(cfg, client=service(echo_service(record=seen)))
    vecs = emb.embed_passages(["a", "b", "c"])
    assert len(vecs) == 3
    assert [len(p["input"]) for p in seen] == [2, 1]


def test_http_embedder_dim_pinned():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        dim = 4 if calls["n"] == 1 else 5
        payload = json.loads(request.content)
        return httpx.Response(200, json={"data": [{"embedding": [1.0] * dim} for _ in payload["input"]]})

    cfg = EmbedderConfig(endpoint_url="http://svc/embed", max_batch=1)
    emb = HttpEmbedder(cfg, client=service(handler))
    emb.embed_passages(["a"])
    assert emb.dim == 4
    with pytest.raises(DimensionMismatchError):
        emb.embed_passages(["b"])


def test_http_embedder_retries_then_succeeds():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(503, text="busy")
        return httpx.Response(200, json={"data": [{"embedding": [1.0, 2.0]}]})

    naps = []
    emb = HttpEmbedder(
        EmbedderConfig(endpoint_url="http://svc/embed"),
        client=service(handler),
        retry=_RetryPolicy(attempts=3, backoff_ms=250, sleep=naps.append),
    )
    vecs = emb.embed_passages(["a"])
    assert len(vecs) == 1
    assert naps == [0.25, 0.5]  # exponential backoff from 250 ms


def test_http_embedder_gives_up_after_bounded_retries():
    def handler(request):
        return httpx.Response(500, text="boom")

    emb = HttpEmbedder(
        EmbedderConfig(endpoint_url="http://svc/embed"),
        client=service(handler),
        retry=_RetryPolicy(attempts=3, sleep=lambda s: None),
    )
    with pytest.raises(TransportError):
        emb.embed_passages(["a"])


def test_http_embedder_hard_error_not_retried():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        return httpx.Response(400, text="bad request")

    emb = HttpEmbedder(EmbedderConfig(endpoint_url="http://svc/embed"), client=service(handler))
    with pytest.raises(TransportError):
        emb.embed_passages(["a"])
    assert calls["n"] == 1


def test_config_validation():
    with pytest.raises(ParameterError):
        EmbedderConfig(max_batch=0)
    with pytest.raises(ParameterError):
        EmbedderConfig(timeout_ms=0)
