"""Text-to-vector providers.

Two interchangeable providers produce unit-norm float64 vectors:

* LocalHashEmbedder: deterministic, offline. Lowercases the text, splits it
  on non-alphanumeric runs, hashes every token and every adjacent token
  bigram with 64-bit FNV-1a into `dim` buckets, then L2-normalizes the
  bucket counts. Same text, same vector, on every platform.
* RemoteEmbedder: client for an embeddings HTTP endpoint; replies are
  re-normalized locally so index scores are pure dot products regardless
  of provider.

An index records which provider built it; queries must use the same one.
"""

from __future__ import annotations

import os
import re
import threading
from typing import Protocol

import httpx
import numpy as np

from . import kernels
from .errors import (
    AuthError,
    BadDimensionError,
    EmptyTextError,
    MalformedResponseError,
    RateLimitError,
    ShapeError,
    TransportError,
)

DEFAULT_DIM = 256
MIN_DIM = 8

ENV_API_KEY = "RAG_API_KEY"
ENV_API_BASE = "RAG_API_BASE"
ENV_EMBED_MODEL = "RAG_EMBED_MODEL"

# maximal runs of Unicode alphanumerics (underscore excluded)
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


class EmbeddingProvider(Protocol):
    provider_id: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def hash_terms(tokens: list[str]) -> list[bytes]:
    """Unigrams plus adjacent bigrams, UTF-8 encoded for hashing."""
    terms = [t.encode("utf-8") for t in tokens]
    terms.extend(f"{a} {b}".encode("utf-8") for a, b in zip(tokens, tokens[1:]))
    return terms


def local_hash_embed(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Deterministic hashed unigram+bigram embedding, unit L2 norm."""
    if dim < MIN_DIM:
        raise BadDimensionError(f"dim must be >= {MIN_DIM}, got {dim}")
    if not text.strip():
        raise EmptyTextError("cannot embed empty text")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyTextError("text contains no embeddable tokens")
    counts = kernels.fnv1a_accumulate(hash_terms(tokens), dim)
    # counts are small integers: the squared sum is exact in float64, so
    # normalization is bit-identical across kernel implementations
    return counts / np.sqrt(counts @ counts)


class LocalHashEmbedder:
    provider_id = "local-hash"

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < MIN_DIM:
            raise BadDimensionError(f"dim must be >= {MIN_DIM}, got {dim}")
        self.dim = dim

    def embed(self, text: str) -> np.ndarray:
        return local_hash_embed(text, self.dim)


def _retry_after_seconds(response: httpx.Response) -> float | None:
    value = response.headers.get("retry-after")
    if value is None:
        return None
    try:
        return float(value)
    except ValueError:
        return None


class RemoteEmbedder:
    """Client for POST {base}/embeddings with {"model", "input"} bodies.

    Bounds in-flight requests with a semaphore (default 4). The api key
    only ever travels in the Authorization header; it is never logged and
    never appears in error messages.
    """

    def __init__(
        self,
        base_url: str,
        model_name: str,
        api_key: str,
        dim: int,
        max_in_flight: int = 4,
        timeout: float = 30.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.provider_id = f"remote:{model_name}"
        self.model_name = model_name
        self.dim = dim
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"),
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=timeout,
            transport=transport,
        )

    @classmethod
    def from_env(cls, dim: int, **kwargs) -> "RemoteEmbedder":
        missing = [v for v in (ENV_API_BASE, ENV_EMBED_MODEL, ENV_API_KEY) if not os.environ.get(v)]
        if missing:
            raise ValueError(f"remote embedding provider needs env vars: {', '.join(missing)}")
        return cls(
            base_url=os.environ[ENV_API_BASE],
            model_name=os.environ[ENV_EMBED_MODEL],
            api_key=os.environ[ENV_API_KEY],
            dim=dim,
            **kwargs,
        )

    def embed(self, text: str) -> np.ndarray:
        if not text.strip():
            raise EmptyTextError("cannot embed empty text")
        payload = {"model": self.model_name, "input": text}
        with self._slots:
            try:
                response = self._client.post("/embeddings", json=payload)
            except httpx.TransportError as exc:
                raise TransportError(f"embedding request failed: {type(exc).__name__}") from exc

        if response.status_code in (401, 403):
            raise AuthError(f"embedding endpoint rejected credentials (HTTP {response.status_code})")
        if response.status_code == 429:
            raise RateLimitError("embedding endpoint rate limited", retry_after=_retry_after_seconds(response))
        if response.status_code != 200:
            raise TransportError(f"embedding endpoint returned HTTP {response.status_code}")

        try:
            values = response.json()["data"][0]["embedding"]
            vector = np.asarray(values, dtype=np.float64)
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedResponseError("embedding response missing data[0].embedding") from exc
        if vector.ndim != 1 or vector.shape[0] != self.dim:
            raise ShapeError(f"embedding has dim {vector.shape}, index expects {self.dim}")
        norm = float(np.linalg.norm(vector))
        if norm == 0.0:
            raise MalformedResponseError("embedding response is the zero vector")
        return vector / norm

    def close(self) -> None:
        self._client.close()


def get_provider(name: str, dim: int = DEFAULT_DIM) -> EmbeddingProvider:
    if name in ("local", "local-hash"):
        return LocalHashEmbedder(dim)
    if name == "remote":
        return RemoteEmbedder.from_env(dim)
    raise ValueError(f"unknown embedding provider {name!r}")
