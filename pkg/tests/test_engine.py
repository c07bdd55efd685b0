import pytest

from lexcrew.agents import Outcome
from lexcrew.config import AppConfig
from lexcrew.corpus import load_document, split_articles, split_sliding
from lexcrew.engine import QaEngine
from lexcrew.errors import ConfigError
from lexcrew.index import build_index

from conftest import DATA_DIR


def test_unknown_pipeline_rejected(sample_engine):
    with pytest.raises(ConfigError):
        sample_engine.ask("pergunta?", pipeline="tree-of-thought")


def test_unknown_model_rejected(sample_engine):
    with pytest.raises(ConfigError):
        sample_engine.ask("pergunta?", pipeline="rag", model_id="gpt-99")


def test_model_ids_reflect_config(sample_engine):
    assert sample_engine.model_ids() == ["scripted-demo"]


def test_pipelines_share_index_by_default(sample_engine):
    assert sample_engine.agents_index is sample_engine.index


def test_agents_index_override_routes_retrieval(offline_config):
    doc = load_document(DATA_DIR / "statute_sample.txt", "clt")
    embedder = offline_config.build_embedder()
    article_index = build_index(split_articles(doc), embedder)
    window_index = build_index(split_sliding(doc), embedder)
    engine = QaEngine(article_index, embedder, offline_config, agents_index=window_index)

    agents_run = engine.ask("Quantos dias dura a licença-maternidade?", pipeline="agents")
    assert agents_run.outcome is Outcome.ANSWERED
    retrieved = agents_run.steps[1].tool_calls[0].chunk_ids
    assert all(":win:" in cid for cid in retrieved)

    rag_run = engine.ask("Quantos dias dura a licença-maternidade?", pipeline="rag")
    retrieved = rag_run.steps[0].tool_calls[0].chunk_ids
    assert all(":art:" in cid for cid in retrieved)


def test_retrieval_k_from_config():
    cfg = AppConfig.from_dict({"retrieval": {"k": 7}})
    doc = load_document(DATA_DIR / "statute_sample.txt", "clt")
    embedder = cfg.build_embedder()
    engine = QaEngine(build_index(split_articles(doc), embedder), embedder, cfg)
    assert engine.k == 7
