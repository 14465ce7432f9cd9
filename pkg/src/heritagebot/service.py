"""Session-holding chat service.

ChatService owns the session store and drives the engine; create_app wraps
it in a FastAPI application speaking the JSON API the web client consumes.
Sessions live in memory (optionally journaled to a json-lines file and
replayed at boot); turn history is append-only and posts to the same
session are serialized by a per-session lock.
"""

from __future__ import annotations

import json
import logging
import secrets
import threading
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .corpus import RECORD_KEYS
from .engine import (
    DEFAULT_BUDGET,
    DEFAULT_K,
    DEFAULT_MIN_SCORE,
    PromptMode,
    RagEngine,
)
from .errors import (
    BackendError,
    EmptyTextError,
    HeritageBotError,
    NotFoundError,
)

logger = logging.getLogger(__name__)

DEFAULT_SESSION_TTL_SECONDS = 24 * 3600
MAX_SUGGESTIONS = 3


def parse_suggestions(reply: str) -> list[str]:
    """Non-empty reply lines, capped at three, shown to the user as chips."""
    return [line.strip() for line in reply.splitlines() if line.strip()][:MAX_SUGGESTIONS]


@dataclass(frozen=True)
class SessionSettings:
    k: int = DEFAULT_K
    min_score: float = DEFAULT_MIN_SCORE
    budget: int = DEFAULT_BUDGET
    mode: str = PromptMode.ANSWER.value

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class Turn:
    role: str
    text: str
    ts: datetime


@dataclass
class ChatSession:
    session_id: str
    created_at: datetime
    settings: SessionSettings
    turns: list[Turn] = field(default_factory=list)
    last_active: datetime = None  # type: ignore[assignment]
    lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self) -> None:
        if self.last_active is None:
            self.last_active = self.created_at

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "created_at": self.created_at.isoformat(),
            "settings": self.settings.as_dict(),
            "turns": [
                {"role": t.role, "text": t.text, "ts": t.ts.isoformat()} for t in self.turns
            ],
        }


class SessionJournal:
    """Append-only json-lines log of session events, replayed at boot."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()

    def append(self, event: dict) -> None:
        line = json.dumps(event, ensure_ascii=False)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def replay(self) -> dict[str, ChatSession]:
        sessions: dict[str, ChatSession] = {}
        try:
            fh = open(self.path, encoding="utf-8")
        except FileNotFoundError:
            return sessions
        with fh:
            for line in fh:
                if not line.strip():
                    continue
                event = json.loads(line)
                if event["event"] == "create":
                    session = ChatSession(
                        session_id=event["session_id"],
                        created_at=datetime.fromisoformat(event["created_at"]),
                        settings=SessionSettings(**event["settings"]),
                    )
                    sessions[session.session_id] = session
                elif event["event"] == "turn":
                    session = sessions.get(event["session_id"])
                    if session is None:
                        logger.warning("journal turn for unknown session %s", event["session_id"])
                        continue
                    ts = datetime.fromisoformat(event["ts"])
                    session.turns.append(Turn(role=event["role"], text=event["text"], ts=ts))
                    session.last_active = ts
        return sessions


class ChatService:
    """Engine plus session bookkeeping; the HTTP layer is a thin shell."""

    def __init__(
        self,
        engine: RagEngine,
        journal_path: str | None = None,
        session_ttl_seconds: float = DEFAULT_SESSION_TTL_SECONDS,
    ):
        self.engine = engine
        self.session_ttl_seconds = session_ttl_seconds
        self._sessions: dict[str, ChatSession] = {}
        self._store_lock = threading.Lock()
        self._journal = SessionJournal(journal_path) if journal_path else None
        if self._journal:
            self._sessions = self._journal.replay()
            logger.info("replayed %d sessions from %s", len(self._sessions), journal_path)

    # -- sessions ------------------------------------------------------------

    def create_session(self, settings: SessionSettings | None = None) -> ChatSession:
        session = ChatSession(
            session_id=secrets.token_urlsafe(16),
            created_at=datetime.now(timezone.utc),
            settings=settings or SessionSettings(),
        )
        with self._store_lock:
            self._sessions[session.session_id] = session
        if self._journal:
            self._journal.append(
                {
                    "event": "create",
                    "session_id": session.session_id,
                    "created_at": session.created_at.isoformat(),
                    "settings": session.settings.as_dict(),
                }
            )
        return session

    def get_session(self, session_id: str) -> ChatSession:
        now = datetime.now(timezone.utc)
        with self._store_lock:
            session = self._sessions.get(session_id)
            if session is not None and (now - session.last_active).total_seconds() > self.session_ttl_seconds:
                del self._sessions[session_id]
                session = None
        if session is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return session

    # -- pipeline ------------------------------------------------------------

    def post_message(self, session_id: str, text: str, mode: str | None = None) -> dict:
        """Run one full turn; appends user+assistant turns only on success."""
        if not text.strip():
            raise EmptyTextError("message text is empty")
        session = self.get_session(session_id)
        prompt_mode = PromptMode(mode) if mode else PromptMode(session.settings.mode)
        with session.lock:
            history = [(t.role, t.text) for t in session.turns]
            result = self.engine.respond(
                history,
                text,
                mode=prompt_mode,
                settings=self._engine_settings(session.settings),
            )
            self._append_turn(session, "user", text)
            self._append_turn(session, "assistant", result.reply)
        response = {
            "reply": result.reply,
            "hits": [
                {"main_key": record.main_key, "score": score}
                for record, score in result.context.hits
            ],
        }
        if prompt_mode is PromptMode.SUGGEST_FOLLOWUPS:
            response["suggestions"] = parse_suggestions(result.reply)
        return response

    def _engine_settings(self, settings: SessionSettings):
        from .engine import EngineSettings

        return EngineSettings(k=settings.k, min_score=settings.min_score, budget=settings.budget)

    def _append_turn(self, session: ChatSession, role: str, text: str) -> None:
        now = datetime.now(timezone.utc)
        if session.turns and now < session.turns[-1].ts:
            now = session.turns[-1].ts
        session.turns.append(Turn(role=role, text=text, ts=now))
        session.last_active = now
        if self._journal:
            self._journal.append(
                {
                    "event": "turn",
                    "session_id": session.session_id,
                    "role": role,
                    "text": text,
                    "ts": now.isoformat(),
                }
            )

    # -- retrieval-only ------------------------------------------------------

    def search(self, query: str, k: int) -> list[dict]:
        if not query.strip():
            raise EmptyTextError("search query is empty")
        ctx = self.engine.retrieve(query, k=k, min_score=-1.0)
        return [
            {
                "main_key": record.main_key,
                "score": score,
                "record": {key: getattr(record, key) for key in RECORD_KEYS},
            }
            for record, score in ctx.hits
        ]

    def health(self) -> dict:
        return {
            "status": "ok",
            "corpus_size": len(self.engine.corpus),
            "index_dim": self.engine.index.dim,
            "provider_id": self.engine.provider.provider_id,
            "backend_id": self.engine.backend.backend_id,
        }


# -- HTTP layer ---------------------------------------------------------------


class CreateSessionBody(BaseModel):
    k: int | None = None
    min_score: float | None = None
    budget: int | None = None
    mode: str | None = None


class PostMessageBody(BaseModel):
    text: str
    mode: str | None = None


def _error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": {"code": code, "message": message}})


def create_app(service: ChatService, allow_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="heritagebot", docs_url=None, redoc_url=None)

    if allow_origin:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=[allow_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(NotFoundError)
    def _not_found(request, exc):
        return _error_response(404, exc.code, str(exc))

    @app.exception_handler(BackendError)
    def _backend_error(request, exc):
        return _error_response(502, exc.code, str(exc))

    @app.exception_handler(HeritageBotError)
    def _bot_error(request, exc):
        return _error_response(400, exc.code, str(exc))

    @app.exception_handler(RequestValidationError)
    def _validation_error(request, exc):
        return _error_response(400, "validation_error", str(exc))

    @app.exception_handler(ValueError)
    def _value_error(request, exc):
        return _error_response(400, "validation_error", str(exc))

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody | None = None):
        overrides = {
            key: value
            for key, value in (body.model_dump() if body else {}).items()
            if value is not None
        }
        if "mode" in overrides:
            overrides["mode"] = PromptMode(overrides["mode"]).value
        session = service.create_session(SessionSettings(**overrides))
        return session.as_dict()

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return service.get_session(session_id).as_dict()

    @app.post("/v1/sessions/{session_id}/messages")
    def post_message(session_id: str, body: PostMessageBody):
        if body.mode is not None:
            PromptMode(body.mode)
        return service.post_message(session_id, body.text, mode=body.mode)

    @app.get("/v1/heritage/search")
    def search(q: str, k: int = DEFAULT_K):
        if k < 0:
            raise ValueError("k must be non-negative")
        return {"hits": service.search(q, k)}

    @app.get("/v1/health")
    def health():
        return service.health()

    return app
