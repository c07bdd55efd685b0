import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA_DIR = Path(__file__).parent.parent / "data"


@pytest.fixture(scope="session")
def offline_config():
    from lexcrew.config import AppConfig

    return AppConfig.load(DATA_DIR / "lexcrew.offline.json")


@pytest.fixture(scope="session")
def sample_bank():
    from lexcrew.bench import load_bank

    return load_bank(DATA_DIR / "bank.jsonl")


@pytest.fixture(scope="session")
def sample_engine(offline_config):
    from lexcrew.corpus import load_document, split_articles
    from lexcrew.engine import QaEngine
    from lexcrew.index import build_index

    doc = load_document(DATA_DIR / "statute_sample.txt", "clt")
    embedder = offline_config.build_embedder()
    index = build_index(split_articles(doc), embedder)
    return QaEngine(index, embedder, offline_config)
