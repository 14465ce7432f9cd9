"""heritagebot: retrieval-augmented chat over a Seoul heritage dataset."""

__version__ = "0.1.0"

from .corpus import Corpus, HeritageRecord, load_corpus, parse_records, render_document_text
from .embedding import LocalHashEmbedder, RemoteEmbedder, local_hash_embed
from .engine import PromptMode, RagEngine, build_index, retrieve_context
from .index import ScoredHit, VectorIndex

__all__ = [
    "Corpus",
    "HeritageRecord",
    "LocalHashEmbedder",
    "PromptMode",
    "RagEngine",
    "RemoteEmbedder",
    "ScoredHit",
    "VectorIndex",
    "build_index",
    "load_corpus",
    "local_hash_embed",
    "parse_records",
    "render_document_text",
    "retrieve_context",
]
