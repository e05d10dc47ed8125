from __future__ import annotations

from pathlib import Path

import pytest

from statrag import (EmbedderKind, EmbedderSpec, GeneratorSpec,
                     LocalHashEmbedder, QueryEngine, build_citation_catalog,
                     build_index, chunk_corpus, load_adjacency, load_corpus)

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def documents():
    return load_corpus(FIXTURES / "corpus")


@pytest.fixture(scope="session")
def chunks(documents):
    return chunk_corpus(documents, 1000, 200)


@pytest.fixture(scope="session")
def embedder():
    return LocalHashEmbedder(EmbedderSpec(kind=EmbedderKind.LOCAL_HASH, dim=256))


@pytest.fixture(scope="session")
def corpus_index(chunks, embedder):
    return build_index(chunks, embedder)


@pytest.fixture(scope="session")
def citations(documents):
    return build_citation_catalog(documents)


@pytest.fixture(scope="session")
def adjacency():
    return load_adjacency(FIXTURES / "adjacency.json")


@pytest.fixture
def engine(corpus_index, embedder, citations, adjacency):
    """Stub-generator engine with a frozen clock: output is fully deterministic."""
    return QueryEngine(corpus_index, embedder, GeneratorSpec(),
                       citations=citations, adjacency=adjacency,
                       clock=lambda: 0.0)
