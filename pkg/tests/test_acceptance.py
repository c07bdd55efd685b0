"""Acceptance suite: one test per release criterion, at the stated
tolerances and runtime budgets. Run with `pytest tests/test_acceptance.py -v -s`
to see one PASS line per criterion."""

import random
import time

import numpy as np
import pytest

from helpers import PresetEmbedder, grid_judge
from oracles import oracle_bleu, oracle_sliding_windows, oracle_topk
from lexcrew.agents import Outcome
from lexcrew.bench import run_benchmark
from lexcrew.corpus import SourceDocument, split_articles, split_sliding
from lexcrew.embed import EmbeddingVector
from lexcrew.evalkit import answer_correctness, bleu, describe_stats
from lexcrew.index import ChunkRef, VectorIndex, search_topk


def ok(n, message):
    print(f"\nACCEPTANCE PASS [{n}] {message}")


# 1 -------------------------------------------------------------------------

GOLDEN_PAIRS = [
    ("the the the the the the the", ["the cat is on the mat"]),
    ("the cat is on the mat", ["the cat is on the mat"]),
    ("", ["qualquer coisa"]),
    ("gato", ["gato"]),
    ("gato", ["cachorro"]),
    ("o empregado tem direito a férias", ["o empregado tem direito a férias anuais remuneradas"]),
    ("o empregado tem direito a férias anuais remuneradas e abono", ["o empregado tem direito a férias"]),
    ("trinta dias corridos de férias", ["férias de trinta dias corridos", "trinta dias de férias"]),
    ("a a a a", ["a b a c"]),
    ("Art. 129: férias anuais!", ["art 129 férias anuais"]),
    ("salário mínimo, décimo terceiro", ["salário mínimo e gratificação natalina"]),
    ("uma frase sem nenhuma palavra em comum", ["texto totalmente diferente aqui"]),
    ("aviso prévio de 30 dias", ["aviso prévio de 30 dias", "o aviso prévio dura trinta dias"]),
    ("repouso semanal remunerado aos domingos", ["repouso semanal remunerado preferencialmente aos domingos"]),
    ("x y z w", ["x y z w v u t s r q"]),
    ("licença maternidade de cento e vinte dias sem prejuízo", ["licença-maternidade de 120 dias"]),
    ("horas extras pagas com acréscimo de cinquenta por cento", ["a hora extra tem acréscimo mínimo de cinquenta por cento"]),
    ("a b", ["a b", "a b c d e f"]),
    ("todo empregado fará jus a descanso", ["é assegurado descanso a todo empregado"]),
    ("?!...", ["pontuação apenas"]),
]


def test_criterion_1_bleu_oracle_equivalence():
    started = time.perf_counter()
    assert len(GOLDEN_PAIRS) == 20
    for candidate, references in GOLDEN_PAIRS:
        expected = oracle_bleu(candidate, references)
        got = bleu(candidate, references)
        assert abs(got - expected) < 1e-9, (candidate, references, got, expected)
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    ok(1, f"BLEU matches the brute-force oracle to 1e-9 on 20 golden pairs ({elapsed:.3f}s)")


# 2 -------------------------------------------------------------------------

def test_criterion_2_retrieval_exactness():
    started = time.perf_counter()
    rng = np.random.default_rng(20240229)
    n, dim, k = 1000, 64, 20
    matrix = rng.standard_normal((n, dim))
    # plant duplicate rows so ties genuinely occur inside the top-k
    for j in range(0, n, 40):
        matrix[j] = matrix[0]
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    matrix = matrix.astype(np.float32)
    index = VectorIndex(matrix, [ChunkRef(f"c{i}", "t") for i in range(n)], "bench")
    for _ in range(50):
        q = rng.standard_normal(dim)
        q /= np.linalg.norm(q)
        query = EmbeddingVector(values=tuple(float(x) for x in q), dim=dim, model_id="bench")
        result = search_topk(index, query, k=k)
        scores = matrix @ np.asarray(query.values, dtype=np.float32)
        expect_ids = oracle_topk([float(s) for s in scores], k)
        assert result.chunk_ids() == [f"c{i}" for i in expect_ids]
        assert [h.score for h in result.hits] == [float(scores[i]) for i in expect_ids]
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    ok(2, f"top-20 over 1000x64 matches the full-sort oracle on 50 queries, ties included ({elapsed:.3f}s)")


# 3 -------------------------------------------------------------------------

def test_criterion_3_splitter_properties():
    started = time.perf_counter()
    rng = random.Random(1943)
    alphabet = "abcdefghij .\nArtPqrs"
    for _ in range(1000):
        length = rng.randint(0, 10_000)
        size = rng.randint(1, 800)
        overlap = rng.randint(0, size - 1)
        text = "".join(rng.choice(alphabet) for _ in range(length))
        doc = SourceDocument(doc_id="r", text=text)
        chunks = split_sliding(doc, chunk_size=size, overlap=overlap)
        bounds = [(c.start_offset, c.end_offset) for c in chunks]
        assert bounds == oracle_sliding_windows(length, size, overlap)
        if length == 0:
            assert bounds == []
            continue
        step = size - overlap
        assert bounds[0][0] == 0 and bounds[-1][1] == length  # coverage endpoints
        previous_end = 0
        for i, (a, b) in enumerate(bounds):
            assert a <= previous_end  # no gaps: full coverage
            assert b > previous_end or i == 0  # every window adds new characters
            previous_end = b
            if i:
                assert a - bounds[i - 1][0] == step  # step invariant
        for a, b in bounds[:-1]:
            assert b < length  # stop rule: only the last window reaches the end

    # article splitter: byte-exact reconstruction of a 100-article statute
    articles = []
    body_rng = random.Random(7)
    for i in range(1, 101):
        body = " ".join("palavra%d" % body_rng.randint(0, 50) for _ in range(body_rng.randint(3, 40)))
        articles.append(f"Art. {i}º {body}\n\n")
    statute = "PREÂMBULO sintético.\n\n" + "".join(articles)
    doc = SourceDocument(doc_id="statute", text=statute)
    chunks = split_articles(doc)
    assert len(chunks) == 101  # preamble + 100 articles
    assert "".join(c.text for c in chunks) == statute
    for c in chunks[1:]:
        assert c.text.startswith("Art.")
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    ok(3, f"1000 randomized windows + byte-exact article reconstruction ({elapsed:.3f}s)")


# 4 -------------------------------------------------------------------------

def test_criterion_4_answer_correctness_formula():
    sims = [0.0, 0.25, 0.5, 0.75, 1.0]
    checked = 0
    for tp in range(6):
        for fp in range(6):
            for fn in range(6):
                for sim in sims:
                    judge = grid_judge(tp, fp, fn)
                    embedder = PresetEmbedder(
                        {"CAND": (1.0, 0.0), "REF": (sim, (1.0 - sim * sim) ** 0.5)}
                    )
                    report = answer_correctness("CAND", "REF", embedder, judge)
                    if tp + fp + fn == 0:
                        expected_f1 = 0.0
                    else:
                        expected_f1 = tp / (tp + 0.5 * (fp + fn))
                    expected = 0.75 * expected_f1 + 0.25 * sim
                    assert report.score == expected, (tp, fp, fn, sim, report.score, expected)
                    assert (report.breakdown.tp, report.breakdown.fp, report.breakdown.fn) == (tp, fp, fn)
                    checked += 1
    assert checked == 6 * 6 * 6 * 5
    ok(4, f"answer correctness equals 0.75*F1 + 0.25*sim exactly on {checked} grid points")


# 5 -------------------------------------------------------------------------

def test_criterion_5_statistics_consistency():
    rng = random.Random(5)
    for _ in range(300):
        scores = [rng.uniform(-50, 50) for _ in range(rng.randint(2, 40))]
        s = describe_stats(scores)
        assert s.range == s.max - s.min
        assert abs(s.var - s.std**2) < 1e-9
        if s.mean != 0:
            assert abs(s.cv_percent - 100.0 * s.std / s.mean) < 1e-9

    def synthetic_pair(mean, std):
        d = std / 2**0.5
        return [mean - d, mean + d]

    table1 = describe_stats(synthetic_pair(6.47, 3.43))
    assert table1.cv_percent == pytest.approx(53.06, abs=0.2)  # published 53.06
    table2 = describe_stats(synthetic_pair(4.72, 3.44))
    assert table2.cv_percent == pytest.approx(72.94, abs=0.2)  # published 72.94
    ok(5, f"stats identities hold; cv checks: {table1.cv_percent:.2f}~53.06, {table2.cv_percent:.2f}~72.94")


# 6 -------------------------------------------------------------------------

def test_criterion_6_agent_call_budget(sample_engine):
    started = time.perf_counter()
    run = sample_engine.ask("Quantos dias dura a licença-maternidade?", pipeline="agents")
    assert run.outcome is Outcome.ANSWERED
    assert [s.agent for s in run.steps] == ["OfficeClerk", "HrSpecialist", "HrChief"]
    assert len(run.transcript) == 3  # exactly 3 LLM calls
    assert run.llm_calls == 3
    assert run.retrieval_calls == 1
    retrieval_steps = [s.agent for s in run.steps if s.tool_calls]
    assert retrieval_steps == ["HrSpecialist"]  # attribution

    off = sample_engine.ask("Qual a capital da França?", pipeline="agents")
    assert off.outcome is Outcome.OFF_TOPIC
    assert len(off.transcript) == 1
    assert off.retrieval_calls == 0
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0
    ok(6, f"agents: Answered = 3 LLM + 1 retrieval by the specialist; OffTopic = 1 LLM + 0 ({elapsed:.3f}s)")


# 7 -------------------------------------------------------------------------

def test_criterion_7_baseline_budget(sample_engine):
    run = sample_engine.ask("Qual é o prazo mínimo do aviso prévio quando não há justa causa?", pipeline="rag")
    assert run.outcome is Outcome.ANSWERED
    assert len(run.transcript) == 1
    assert run.llm_calls == 1
    assert run.retrieval_calls == 1
    ok(7, "baseline: exactly 1 LLM call and 1 retrieval call")


# 8 -------------------------------------------------------------------------

def test_criterion_8_benchmark_determinism(sample_engine, sample_bank, tmp_path):
    assert len(sample_bank) >= 10
    pipelines, models = ["agents", "rag"], ["scripted-demo"]
    first = run_benchmark(sample_bank, sample_engine, pipelines, models, tmp_path / "r1", parallelism=1)
    second = run_benchmark(sample_bank, sample_engine, pipelines, models, tmp_path / "r2", parallelism=1)
    bytes1 = (tmp_path / "r1" / "records.jsonl").read_bytes()
    bytes2 = (tmp_path / "r2" / "records.jsonl").read_bytes()
    assert bytes1 == bytes2
    expected_cells = len(sample_bank) * len(pipelines) * len(models)
    for report in (first, second):
        assert len(report.records) + len(report.failures) == expected_cells
    ok(8, f"two bench runs over {len(sample_bank)} questions are byte-identical ({expected_cells} cells each)")


# 9 -------------------------------------------------------------------------

def test_criterion_9_index_persistence_round_trip(tmp_path):
    rng = np.random.default_rng(99)
    n, dim = 500, 48
    matrix = rng.standard_normal((n, dim))
    for j in range(0, n, 25):
        matrix[j] = matrix[3]  # ties must survive the round trip too
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    index = VectorIndex(matrix.astype(np.float32), [ChunkRef(f"c{i}", f"t{i}") for i in range(n)], "m")
    index.save(tmp_path / "clt")
    loaded = VectorIndex.load(tmp_path / "clt")
    for _ in range(100):
        q = rng.standard_normal(dim)
        q /= np.linalg.norm(q)
        query = EmbeddingVector(values=tuple(float(x) for x in q), dim=dim, model_id="m")
        assert search_topk(index, query, k=20) == search_topk(loaded, query, k=20)
    ok(9, "save -> load -> search is bit-identical on 100 random queries")
