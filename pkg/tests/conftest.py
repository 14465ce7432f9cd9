"""Shared fixtures and independent oracles for the test suite.

The oracle helpers here deliberately avoid the library's kernel and index
code paths so they can serve as ground truth for retrieval results.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from heritagebot.backends import EchoBackend, ScriptedBackend
from heritagebot.corpus import Corpus, load_corpus
from heritagebot.embedding import LocalHashEmbedder
from heritagebot.engine import RagEngine, build_index
from heritagebot.index import VectorIndex

DATA_DIR = Path(__file__).parent / "data"
FIXTURE_CORPUS = DATA_DIR / "heritage_100.jsonl"

DIM = 256


def oracle_top_k(
    entries: list[tuple[str, np.ndarray]], query: np.ndarray, k: int
) -> list[tuple[str, float]]:
    """Brute-force exact top-k, implemented independently of the index.

    Scores every entry with a per-pair np.dot call (no matrix batching),
    sorts by score descending with key ascending as the tie-break, and
    truncates to k.
    """
    scored = [(key, float(np.dot(vec, query))) for key, vec in entries]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return scored[:k]


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return load_corpus(FIXTURE_CORPUS)


@pytest.fixture(scope="session")
def provider() -> LocalHashEmbedder:
    return LocalHashEmbedder(DIM)


@pytest.fixture(scope="session")
def index(corpus, provider) -> VectorIndex:
    return build_index(corpus, provider)


@pytest.fixture
def echo_engine(corpus, index, provider) -> RagEngine:
    return RagEngine(corpus=corpus, index=index, provider=provider, backend=EchoBackend())


def make_scripted_engine(corpus, index, provider, replies) -> RagEngine:
    return RagEngine(
        corpus=corpus, index=index, provider=provider, backend=ScriptedBackend(replies)
    )
