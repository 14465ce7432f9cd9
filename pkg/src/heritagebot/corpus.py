"""Heritage dataset ingestion.

The agent's sole knowledge source is a flat file of heritage sites, one
record per line. Each record carries five string fields: a unique id, the
English site name, and a three-level location (dong / gu / city). Two file
formats are accepted: json-lines (canonical) and RFC-4180 csv with a header
row. Validation is strict: the first bad line aborts ingestion so the
corpus and any index built from it can never disagree.
"""

from __future__ import annotations

import csv
import io
import json
import os
import unicodedata
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterator

from .errors import DecodeError, DuplicateKeyError, SchemaError

RECORD_KEYS = ("main_key", "name_eng", "h_eng_dong", "h_eng_gu", "h_eng_city")
LOCATION_KEYS = ("h_eng_dong", "h_eng_gu", "h_eng_city")


@dataclass(frozen=True)
class HeritageRecord:
    """One heritage site: id, English name, three-level English location."""

    main_key: str
    name_eng: str
    h_eng_dong: str
    h_eng_gu: str
    h_eng_city: str


@dataclass
class Corpus:
    """Ordered, duplicate-free collection of heritage records.

    Immutable by convention after construction; order is the source file's
    line order so downstream artifacts are reproducible.
    """

    records: tuple[HeritageRecord, ...]
    source_path: str = "<memory>"
    loaded_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def __post_init__(self) -> None:
        self.records = tuple(self.records)
        self._by_key = {r.main_key: r for r in self.records}

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[HeritageRecord]:
        return iter(self.records)

    def get(self, main_key: str) -> HeritageRecord | None:
        return self._by_key.get(main_key)


def _has_control_chars(value: str) -> bool:
    return any(unicodedata.category(ch) == "Cc" for ch in value)


def _validate_fields(raw: dict, line_no: int) -> HeritageRecord:
    """Check one raw mapping against the record schema; trim field edges."""
    for key in RECORD_KEYS:
        if key not in raw or raw[key] is None:
            raise SchemaError(line_no, key)
    for key in raw:
        if key not in RECORD_KEYS:
            raise SchemaError(line_no, str(key), "unexpected key")

    values = {}
    for key in RECORD_KEYS:
        value = raw[key]
        if not isinstance(value, str):
            raise SchemaError(line_no, key, "value must be a string")
        value = value.strip()
        if _has_control_chars(value):
            raise SchemaError(line_no, key, "control characters in")
        values[key] = value

    if not values["main_key"]:
        raise SchemaError(line_no, "main_key", "empty")
    if not values["name_eng"]:
        raise SchemaError(line_no, "name_eng", "empty")
    if not any(values[key] for key in LOCATION_KEYS):
        raise SchemaError(line_no, "h_eng_dong", "all location fields empty, need at least")

    return HeritageRecord(**values)


def _parse_json_lines(text: str) -> Iterator[tuple[int, HeritageRecord]]:
    # split on real newlines only: splitlines() would also break on
    # U+2028/U+2029, which are legal inside JSON string values
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(line_no, "", f"invalid JSON ({exc.msg})") from exc
        if not isinstance(raw, dict):
            raise SchemaError(line_no, "", "line is not a JSON object")
        yield line_no, _validate_fields(raw, line_no)


def _parse_csv(text: str) -> Iterator[tuple[int, HeritageRecord]]:
    reader = csv.DictReader(io.StringIO(text, newline=""), restkey="__extra__", restval=None)
    if reader.fieldnames is None:
        return
    header = list(reader.fieldnames)
    for key in RECORD_KEYS:
        if key not in header:
            raise SchemaError(1, key, "header missing key")
    for key in header:
        if key not in RECORD_KEYS:
            raise SchemaError(1, key, "unexpected header key")
    for row in reader:
        line_no = reader.line_num
        if "__extra__" in row:
            raise SchemaError(line_no, "", "row has more fields than the header")
        yield line_no, _validate_fields(row, line_no)


def parse_records(data: bytes, fmt: str = "json_lines", source_path: str = "<memory>") -> Corpus:
    """Parse dataset bytes into a Corpus.

    Raises DecodeError on bad UTF-8, SchemaError on the first malformed
    line, DuplicateKeyError on a repeated main_key.
    """
    if fmt not in ("json_lines", "csv"):
        raise ValueError(f"unknown dataset format {fmt!r}")
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise DecodeError(f"dataset is not valid UTF-8: {exc}") from exc

    rows = _parse_json_lines(text) if fmt == "json_lines" else _parse_csv(text)
    records: list[HeritageRecord] = []
    seen: set[str] = set()
    for line_no, record in rows:
        if record.main_key in seen:
            raise DuplicateKeyError(record.main_key, line_no)
        seen.add(record.main_key)
        records.append(record)
    return Corpus(records=records, source_path=source_path)


def load_corpus(path: str | os.PathLike, fmt: str | None = None) -> Corpus:
    """Read a dataset file; format inferred from the extension unless given."""
    path = os.fspath(path)
    if fmt is None:
        fmt = "csv" if path.lower().endswith(".csv") else "json_lines"
    with open(path, "rb") as fh:
        return parse_records(fh.read(), fmt=fmt, source_path=path)


def to_json_lines(corpus: Corpus) -> str:
    """Serialize a corpus back to canonical json-lines (round-trip safe)."""
    lines = []
    for r in corpus:
        lines.append(json.dumps({key: getattr(r, key) for key in RECORD_KEYS}, ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def render_document_text(record: HeritageRecord) -> str:
    """Canonical one-line text for a record, fed to the embedder verbatim.

    Template: "<name>, located in <dong>, <gu>, <city>". Field values are
    substituted as-is (no escaping); trailing whitespace from empty trailing
    location fields is stripped.
    """
    text = (
        f"{record.name_eng}, located in "
        f"{record.h_eng_dong}, {record.h_eng_gu}, {record.h_eng_city}"
    )
    return text.rstrip()
