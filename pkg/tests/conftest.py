"""Shared fixtures: the deterministic 75-contract corpus, a seeded CMS
database, and an engine with the corpus ingested.

The seeded database file is checksummed when first built and re-checked at
session teardown: nothing in the whole suite may mutate it.
"""

import hashlib
from pathlib import Path

import pytest

from contractqa import cms
from contractqa.config import load_config
from contractqa.engine import Engine
from contractqa.fixtures import build_fixtures
from contractqa.index import kernels


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT compilation must never land inside a timed assertion.
    kernels.warmup()


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    return build_fixtures(root, n_contracts=75, seed=42)


@pytest.fixture(scope="session")
def corpus_config(fixture_corpus, tmp_path_factory):
    var = tmp_path_factory.mktemp("var")
    config = load_config()
    config.providers.embed_dimension = 64
    config.paths.index_dir = str(var / "index")
    config.paths.db_path = str(var / "cms.db")
    config.paths.audit_log = str(var / "audit.jsonl")
    return config


@pytest.fixture(scope="session")
def seeded_db(fixture_corpus, corpus_config):
    path = Path(corpus_config.paths.db_path)
    cms.seed(path, fixture_corpus.contracts_csv, fixture_corpus.amendments_csv)
    return path


@pytest.fixture(scope="session", autouse=True)
def db_checksum_guard(seeded_db):
    before = _sha256(seeded_db)
    yield
    after = _sha256(seeded_db)
    assert after == before, "the CMS database file was mutated during the test session"


@pytest.fixture(scope="session")
def engine(fixture_corpus, corpus_config, seeded_db):
    eng = Engine(corpus_config)
    documents, chunks = eng.ingest(fixture_corpus.manifest_path)
    assert documents == 75
    assert chunks >= 75
    assert len(eng.index) == chunks  # one entry per chunk id
    return eng
