"""Chat-completion backends.

One remote HTTP client plus two deterministic offline stubs (scripted and
echo) so the whole pipeline is testable without network access. All
backends expose the same surface: a backend_id and complete_chat(messages).
"""

from __future__ import annotations

import json
import logging
import os
import threading
import time
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .errors import (
    AuthError,
    DeadlineExceeded,
    MalformedResponseError,
    NoUserMessageError,
    RateLimitError,
    ScriptExhaustedError,
    TransportError,
)

logger = logging.getLogger(__name__)

ROLES = ("system", "user", "assistant")

ENV_API_KEY = "RAG_API_KEY"
ENV_API_BASE = "RAG_API_BASE"
ENV_CHAT_MODEL = "RAG_CHAT_MODEL"

DEFAULT_TEMPERATURE = 0.2


@dataclass(frozen=True)
class ChatMessage:
    role: str
    content: str

    def __post_init__(self) -> None:
        if self.role not in ROLES:
            raise ValueError(f"unknown message role {self.role!r}")


class LlmBackend(Protocol):
    backend_id: str

    def complete_chat(self, messages: Sequence[ChatMessage]) -> str: ...


def _check_messages(messages: Sequence[ChatMessage]) -> None:
    if not messages:
        raise ValueError("message list is empty")
    if messages[0].role != "system":
        raise ValueError("first message must have role 'system'")


def _retry_after_seconds(response: httpx.Response) -> float | None:
    value = response.headers.get("retry-after")
    if value is None:
        return None
    try:
        return float(value)
    except ValueError:
        return None


class RemoteChatBackend:
    """Client for POST {base}/chat/completions.

    Request body is {"model", "messages", "temperature"}; the reply text is
    choices[0].message.content. Retries exactly once on HTTP 429, waiting
    for the server's retry-after hint; every other failure surfaces
    immediately as a typed error. The api key never appears in logs or
    error messages.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str,
        temperature: float = DEFAULT_TEMPERATURE,
        deadline: float = 60.0,
        transport: httpx.BaseTransport | None = None,
    ):
        self.backend_id = f"remote:{model}"
        self.model = model
        self.temperature = temperature
        self.deadline = deadline
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"),
            headers={"Authorization": f"Bearer {api_key}"},
            timeout=deadline,
            transport=transport,
        )

    @classmethod
    def from_env(cls, **kwargs) -> "RemoteChatBackend":
        missing = [v for v in (ENV_API_BASE, ENV_CHAT_MODEL, ENV_API_KEY) if not os.environ.get(v)]
        if missing:
            raise ValueError(f"remote chat backend needs env vars: {', '.join(missing)}")
        return cls(
            base_url=os.environ[ENV_API_BASE],
            model=os.environ[ENV_CHAT_MODEL],
            api_key=os.environ[ENV_API_KEY],
            **kwargs,
        )

    def complete_chat(self, messages: Sequence[ChatMessage]) -> str:
        _check_messages(messages)
        payload = {
            "model": self.model,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
            "temperature": self.temperature,
        }
        response = self._post(payload)
        if response.status_code == 429:
            hint = _retry_after_seconds(response)
            logger.info("chat endpoint rate limited, retrying once after %s s", hint)
            time.sleep(hint if hint is not None else 1.0)
            response = self._post(payload)
        if response.status_code in (401, 403):
            raise AuthError(f"chat endpoint rejected credentials (HTTP {response.status_code})")
        if response.status_code == 429:
            raise RateLimitError("chat endpoint rate limited", retry_after=_retry_after_seconds(response))
        if response.status_code != 200:
            raise TransportError(f"chat endpoint returned HTTP {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, LookupError, TypeError) as exc:
            raise MalformedResponseError("chat response missing choices[0].message.content") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("chat response content is not text")
        return content

    def _post(self, payload: dict) -> httpx.Response:
        try:
            return self._client.post("/chat/completions", json=payload)
        except httpx.TimeoutException as exc:
            raise DeadlineExceeded(f"chat request exceeded {self.deadline}s deadline") from exc
        except httpx.TransportError as exc:
            raise TransportError(f"chat request failed: {type(exc).__name__}") from exc


class ScriptedBackend:
    """Replays a fixed list of replies, one per call, regardless of input."""

    backend_id = "scripted"

    def __init__(self, replies: Sequence[str]):
        if not replies:
            raise ValueError("scripted backend needs at least one reply")
        self._replies = list(replies)
        self._cursor = 0
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str) -> "ScriptedBackend":
        """Load replies from a file with one JSON string per line."""
        replies = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    replies.append(json.loads(line))
        return cls(replies)

    def complete_chat(self, messages: Sequence[ChatMessage]) -> str:
        _check_messages(messages)
        with self._lock:
            if self._cursor >= len(self._replies):
                raise ScriptExhaustedError(f"script has only {len(self._replies)} replies")
            reply = self._replies[self._cursor]
            self._cursor += 1
        return reply


class EchoBackend:
    """Returns the last user-role message verbatim; makes grounding testable."""

    backend_id = "echo"

    def complete_chat(self, messages: Sequence[ChatMessage]) -> str:
        _check_messages(messages)
        for message in reversed(messages):
            if message.role == "user":
                return message.content
        raise NoUserMessageError("no user message to echo")
