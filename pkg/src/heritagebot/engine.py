"""Retrieve -> assemble prompt -> generate.

The engine embeds the user's query, pulls the closest heritage records from
the index, renders them into a context block, and hands a guideline-led
message list to the generation backend. Three prompt modes exist: plain
grounded answering, a "converse about the data" mode, and a follow-up
question suggestion mode; the latter two embed their instruction line
verbatim in the prompt.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .backends import ChatMessage, LlmBackend
from .corpus import Corpus, HeritageRecord, render_document_text
from .embedding import EmbeddingProvider
from .errors import BudgetTooSmallError, EmptyTextError, StaleIndexError
from .index import VectorIndex

ENV_GUIDELINE_PATH = "RAG_GUIDELINE_PATH"

DEFAULT_K = 5
DEFAULT_MIN_SCORE = 0.05
DEFAULT_BUDGET = 3000

DATASET_CONVERSATION_INSTRUCTION = "Make conversation with the dataset"
SUGGEST_FOLLOWUPS_INSTRUCTION = "Suggest further questions on Seoul's heritage"
NO_MATCH_LINE = "NO MATCHING RECORDS"

DEFAULT_GUIDELINE = """\
You are a friendly guide to the cultural heritage of Seoul.
Answer using ONLY the heritage records listed in the CONTEXT section of the message.
Each record gives a site name and its location (dong, gu, city) and nothing more.
If the context does not contain what the user asks about, say that you do not know; never invent details.
The dataset is limited, so remind the user to double-check important details with official sources.
Keep replies concise and conversational."""


class PromptMode(str, Enum):
    ANSWER = "answer"
    DATASET_CONVERSATION = "dataset_conversation"
    SUGGEST_FOLLOWUPS = "suggest_followups"


def load_guideline(path: str | None = None) -> str:
    """Guideline text: explicit path, else RAG_GUIDELINE_PATH, else built-in."""
    path = path or os.environ.get(ENV_GUIDELINE_PATH)
    if path:
        with open(path, encoding="utf-8") as fh:
            return fh.read().strip()
    return DEFAULT_GUIDELINE


def estimate_tokens(text: str) -> int:
    """Heuristic upper-bound token count: ceil(UTF-8 bytes / 4)."""
    return (len(text.encode("utf-8")) + 3) // 4


@dataclass(frozen=True)
class RetrievedContext:
    """Records retrieved for one query, best first."""

    hits: tuple[tuple[HeritageRecord, float], ...]
    k_used: int
    min_score_applied: float


@dataclass(frozen=True)
class PromptBundle:
    """Fully assembled generation input for a single turn."""

    guideline: str
    context_block: str
    history: tuple[tuple[str, str], ...]
    user_text: str
    mode: PromptMode

    def user_payload(self) -> str:
        """The final user turn: mode instruction + context + user text."""
        context_section = f"CONTEXT:\n{self.context_block}"
        if self.mode is PromptMode.ANSWER:
            return f"{context_section}\n\nQUESTION: {self.user_text}"
        if self.mode is PromptMode.DATASET_CONVERSATION:
            return f"{DATASET_CONVERSATION_INSTRUCTION}\n\n{context_section}\n\n{self.user_text}"
        parts = [
            SUGGEST_FOLLOWUPS_INSTRUCTION,
            "Reply with exactly 3 questions grounded in the CONTEXT section, "
            "one question per line and nothing else.",
            context_section,
        ]
        if self.user_text:
            parts.append(self.user_text)
        return "\n\n".join(parts)

    def to_messages(self) -> list[ChatMessage]:
        messages = [ChatMessage("system", self.guideline)]
        messages.extend(ChatMessage(role, text) for role, text in self.history)
        messages.append(ChatMessage("user", self.user_payload()))
        return messages

    def rendered_text(self) -> str:
        """Canonical flat rendering, used for token budgeting."""
        return "\n\n".join(f"{m.role}: {m.content}" for m in self.to_messages())


def format_context_block(ctx: RetrievedContext) -> str:
    if not ctx.hits:
        return NO_MATCH_LINE
    lines = [
        f"{rank}. (score={score:.4f}) {render_document_text(record)}"
        for rank, (record, score) in enumerate(ctx.hits, start=1)
    ]
    return "\n".join(lines)


EMPTY_CONTEXT = RetrievedContext(hits=(), k_used=0, min_score_applied=0.0)


def retrieve_context(
    query: str,
    corpus: Corpus,
    index: VectorIndex,
    provider: EmbeddingProvider,
    k: int = DEFAULT_K,
    min_score: float = DEFAULT_MIN_SCORE,
) -> RetrievedContext:
    """Embed the query, scan the index, resolve hits back to records.

    Hits scoring below min_score are dropped. A hit whose main_key is not
    in the corpus means index and corpus are out of sync: StaleIndexError.
    """
    vector = provider.embed(query)
    resolved = []
    for hit in index.top_k(vector, k):
        if hit.score < min_score:
            continue
        record = corpus.get(hit.main_key)
        if record is None:
            raise StaleIndexError(
                f"index entry {hit.main_key!r} is not in the corpus; rebuild the index"
            )
        resolved.append((record, hit.score))
    return RetrievedContext(hits=tuple(resolved), k_used=k, min_score_applied=min_score)


def build_prompt(
    ctx: RetrievedContext,
    history: Sequence[tuple[str, str]],
    user_text: str,
    mode: PromptMode = PromptMode.ANSWER,
    budget: int = DEFAULT_BUDGET,
    guideline: str | None = None,
) -> PromptBundle:
    """Assemble the generation input, trimming history to the token budget.

    History is dropped oldest-first until the rendered bundle fits the
    budget; the guideline, context block, and current user text are never
    truncated, so if those alone exceed the budget the call fails with
    BudgetTooSmallError.
    """
    if guideline is None:
        guideline = load_guideline()
    user_text = user_text.strip()
    if mode is not PromptMode.SUGGEST_FOLLOWUPS and not user_text:
        raise EmptyTextError(f"mode {mode.value} requires user text")

    kept = [(role, text) for role, text in history]
    while True:
        bundle = PromptBundle(
            guideline=guideline,
            context_block=format_context_block(ctx),
            history=tuple(kept),
            user_text=user_text,
            mode=mode,
        )
        if estimate_tokens(bundle.rendered_text()) <= budget:
            return bundle
        if not kept:
            raise BudgetTooSmallError(
                f"guideline, context, and user text need "
                f"{estimate_tokens(bundle.rendered_text())} tokens, budget is {budget}"
            )
        kept.pop(0)


def generate(bundle: PromptBundle, backend: LlmBackend) -> str:
    """Forward the bundle to the backend; the reply comes back unmodified."""
    return backend.complete_chat(bundle.to_messages())


@dataclass(frozen=True)
class EngineSettings:
    k: int = DEFAULT_K
    min_score: float = DEFAULT_MIN_SCORE
    budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class EngineReply:
    reply: str
    bundle: PromptBundle
    context: RetrievedContext


def build_index(corpus: Corpus, provider: EmbeddingProvider) -> VectorIndex:
    """Embed every record's rendered text into a fresh index."""
    index = VectorIndex(dim=provider.dim, provider_id=provider.provider_id)
    for record in corpus:
        index.add(record.main_key, provider.embed(render_document_text(record)))
    return index


class RagEngine:
    """Stateless pipeline over a fixed (corpus, index, provider, backend)."""

    def __init__(
        self,
        corpus: Corpus,
        index: VectorIndex,
        provider: EmbeddingProvider,
        backend: LlmBackend,
        guideline: str | None = None,
        settings: EngineSettings = EngineSettings(),
    ):
        if index.provider_id != provider.provider_id:
            raise ValueError(
                f"index was built by provider {index.provider_id!r}, "
                f"queries use {provider.provider_id!r}"
            )
        if index.dim != provider.dim:
            raise ValueError(f"index dim {index.dim} != provider dim {provider.dim}")
        self.corpus = corpus
        self.index = index
        self.provider = provider
        self.backend = backend
        self.guideline = guideline if guideline is not None else load_guideline()
        self.settings = settings

    def retrieve(self, query: str, k: int | None = None, min_score: float | None = None) -> RetrievedContext:
        return retrieve_context(
            query,
            self.corpus,
            self.index,
            self.provider,
            k=self.settings.k if k is None else k,
            min_score=self.settings.min_score if min_score is None else min_score,
        )

    def respond(
        self,
        history: Sequence[tuple[str, str]],
        user_text: str,
        mode: PromptMode = PromptMode.ANSWER,
        settings: EngineSettings | None = None,
    ) -> EngineReply:
        """Run the full pipeline for one turn."""
        settings = settings or self.settings
        query = user_text.strip()
        if not query and mode is PromptMode.SUGGEST_FOLLOWUPS:
            # suggestion mode may run on history alone: retrieve against the
            # most recent user turn, or skip retrieval when there is none
            query = next((text for role, text in reversed(history) if role == "user"), "")
        ctx = (
            retrieve_context(query, self.corpus, self.index, self.provider,
                             k=settings.k, min_score=settings.min_score)
            if query
            else EMPTY_CONTEXT
        )
        bundle = build_prompt(
            ctx,
            history,
            user_text,
            mode=mode,
            budget=settings.budget,
            guideline=self.guideline,
        )
        return EngineReply(reply=generate(bundle, self.backend), bundle=bundle, context=ctx)
