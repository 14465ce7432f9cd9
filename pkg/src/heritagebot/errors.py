"""Exception types shared across the package.

Every error the library raises on purpose derives from HeritageBotError, so
callers (CLI, HTTP service) can map them to exit codes / status codes in one
place. Transport-level libraries' exceptions are always translated at the
boundary, never leaked.
"""

from __future__ import annotations


class HeritageBotError(Exception):
    """Base class for all typed errors raised by this package."""

    code = "error"


# ---------------------------------------------------------------------------
# dataset ingestion


class DecodeError(HeritageBotError):
    """Input bytes are not valid UTF-8."""

    code = "decode_error"


class SchemaError(HeritageBotError):
    """A record is missing a key or violates a field constraint."""

    code = "schema_error"

    def __init__(self, line_no: int, key: str, reason: str = "missing key"):
        self.line_no = line_no
        self.key = key
        self.reason = reason
        super().__init__(f"line {line_no}: {reason} \"{key}\"")


class DuplicateKeyError(HeritageBotError):
    """The same main_key appears twice (in a dataset or an index)."""

    code = "duplicate_key"

    def __init__(self, main_key: str, line_no: int | None = None):
        self.main_key = main_key
        self.line_no = line_no
        where = f" (line {line_no})" if line_no is not None else ""
        super().__init__(f"duplicate main_key \"{main_key}\"{where}")


# ---------------------------------------------------------------------------
# embedding


class EmptyTextError(HeritageBotError):
    """Text is empty, or contains nothing embeddable."""

    code = "empty_text"


class BadDimensionError(HeritageBotError):
    """Requested embedding dimension is out of range."""

    code = "bad_dimension"


class ShapeError(HeritageBotError):
    """A remote embedding's dimension differs from the configured one."""

    code = "shape_error"


# ---------------------------------------------------------------------------
# vector index


class DimMismatchError(HeritageBotError):
    """Vector dimension differs from the index dimension."""

    code = "dim_mismatch"


class IoError(HeritageBotError):
    """Reading or writing an index file failed at the OS level."""

    code = "io_error"


class FormatVersionError(HeritageBotError):
    """Index file declares a format version this build cannot read."""

    code = "format_version"


class CorruptIndexError(HeritageBotError):
    """Index file is damaged: bad magic, truncated, or checksum mismatch."""

    code = "corrupt_index"


# ---------------------------------------------------------------------------
# retrieval / prompting


class StaleIndexError(HeritageBotError):
    """Index returned a main_key that the loaded corpus does not contain."""

    code = "stale_index"


class BudgetTooSmallError(HeritageBotError):
    """Prompt parts that are never truncated already exceed the token budget."""

    code = "budget_too_small"


# ---------------------------------------------------------------------------
# generation backends


class BackendError(HeritageBotError):
    """Base for errors raised while talking to a generation/embedding backend."""

    code = "backend_error"


class TransportError(BackendError):
    """Network-level failure (connect, DNS, protocol)."""

    code = "transport_error"


class AuthError(BackendError):
    """Remote service rejected the credentials (HTTP 401/403)."""

    code = "auth_error"


class RateLimitError(BackendError):
    """Remote service throttled the request (HTTP 429)."""

    code = "rate_limited"

    def __init__(self, message: str = "rate limited", retry_after: float | None = None):
        self.retry_after = retry_after
        super().__init__(message)


class DeadlineExceeded(BackendError):
    """The call did not complete within the configured deadline."""

    code = "deadline_exceeded"


class MalformedResponseError(BackendError):
    """Remote reply was not in the expected shape."""

    code = "malformed_response"


class ScriptExhaustedError(BackendError):
    """Scripted test backend was called more times than it has replies."""

    code = "script_exhausted"


class NoUserMessageError(BackendError):
    """Echo test backend received a message list with no user turn."""

    code = "no_user_message"


# ---------------------------------------------------------------------------
# chat service


class NotFoundError(HeritageBotError):
    """Unknown (or expired) session id."""

    code = "not_found"
