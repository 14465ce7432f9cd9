"""Persistent cosine top-k index.

An exact brute-force scan over unit vectors is the production algorithm:
the heritage corpus is a few thousand records at most, and an exact scan
keeps scores identical to the test oracle. Ties are broken by main_key
ascending so rankings are total and reproducible.

File format (version 1, everything little-endian):

    magic           4 bytes  b"HRIX"
    format_version  u32
    dim             u32
    provider_len    u32
    provider_id     UTF-8 bytes
    count           u64
    entries         count * [ key_len u32, key UTF-8, dim * f64 ]
    crc32           u32      CRC-32 of all preceding bytes

Vectors are stored as raw IEEE-754 doubles, so save → load round-trips
bit-exactly.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    CorruptIndexError,
    DimMismatchError,
    DuplicateKeyError,
    FormatVersionError,
    IoError,
)

MAGIC = b"HRIX"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ScoredHit:
    main_key: str
    score: float


class VectorIndex:
    """Ordered (main_key, unit vector) store answering cosine top-k queries."""

    def __init__(self, dim: int, provider_id: str):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        self.dim = dim
        self.provider_id = provider_id
        self.format_version = FORMAT_VERSION
        self._keys: list[str] = []
        self._vectors: list[np.ndarray] = []
        self._key_set: set[str] = set()
        self._matrix: np.ndarray | None = None
        self._keys_arr: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self._keys)

    def keys(self) -> list[str]:
        return list(self._keys)

    def vector(self, main_key: str) -> np.ndarray:
        """Stored vector for a key; raises KeyError when absent."""
        try:
            return self._vectors[self._keys.index(main_key)]
        except ValueError:
            raise KeyError(main_key) from None

    def add(self, main_key: str, vector: np.ndarray) -> None:
        vec = np.ascontiguousarray(vector, dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != self.dim:
            raise DimMismatchError(f"vector has dim {vec.shape}, index expects {self.dim}")
        if main_key in self._key_set:
            raise DuplicateKeyError(main_key)
        self._keys.append(main_key)
        self._vectors.append(vec)
        self._key_set.add(main_key)
        self._matrix = None
        self._keys_arr = None

    def _stacked(self) -> tuple[np.ndarray, np.ndarray]:
        if self._matrix is None:
            self._matrix = np.vstack(self._vectors) if self._vectors else np.empty((0, self.dim))
            self._keys_arr = np.asarray(self._keys)
        return self._matrix, self._keys_arr  # type: ignore[return-value]

    def top_k(self, query: np.ndarray, k: int) -> list[ScoredHit]:
        """The min(k, size) highest-cosine entries, score descending,
        ties broken by main_key ascending."""
        if k < 0:
            raise ValueError(f"k must be non-negative, got {k}")
        q = np.ascontiguousarray(query, dtype=np.float64)
        if q.ndim != 1 or q.shape[0] != self.dim:
            raise DimMismatchError(f"query has dim {q.shape}, index expects {self.dim}")
        if k == 0 or not self._keys:
            return []
        matrix, keys_arr = self._stacked()
        scores = kernels.dot_scores(matrix, q)
        # lexsort: primary key last -> sort by -score, then main_key ascending
        order = np.lexsort((keys_arr, -scores))[: min(k, len(self._keys))]
        return [ScoredHit(self._keys[i], float(scores[i])) for i in order]

    # -- persistence --------------------------------------------------------

    def save(self, path: str) -> None:
        provider_bytes = self.provider_id.encode("utf-8")
        parts = [
            MAGIC,
            struct.pack("<III", FORMAT_VERSION, self.dim, len(provider_bytes)),
            provider_bytes,
            struct.pack("<Q", len(self._keys)),
        ]
        for key, vec in zip(self._keys, self._vectors):
            key_bytes = key.encode("utf-8")
            parts.append(struct.pack("<I", len(key_bytes)))
            parts.append(key_bytes)
            parts.append(vec.astype("<f8", copy=False).tobytes())
        body = b"".join(parts)
        blob = body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)
        try:
            with open(path, "wb") as fh:
                fh.write(blob)
        except OSError as exc:
            raise IoError(f"cannot write index to {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "VectorIndex":
        try:
            with open(path, "rb") as fh:
                blob = fh.read()
        except OSError as exc:
            raise IoError(f"cannot read index from {path}: {exc}") from exc

        if len(blob) < len(MAGIC) + 4 or blob[: len(MAGIC)] != MAGIC:
            raise CorruptIndexError(f"{path} is not an index file (bad magic)")
        (version,) = struct.unpack_from("<I", blob, 4)
        if version != FORMAT_VERSION:
            raise FormatVersionError(f"unsupported index format version {version}")
        body, trailer = blob[:-4], blob[-4:]
        (stored_crc,) = struct.unpack("<I", trailer)
        if zlib.crc32(body) & 0xFFFFFFFF != stored_crc:
            raise CorruptIndexError(f"{path} failed its checksum; file is damaged")

        try:
            offset = 8
            dim, provider_len = struct.unpack_from("<II", body, offset)
            offset += 8
            provider_id = body[offset : offset + provider_len].decode("utf-8")
            offset += provider_len
            (count,) = struct.unpack_from("<Q", body, offset)
            offset += 8
            index = cls(dim=dim, provider_id=provider_id)
            vec_bytes = 8 * dim
            for _ in range(count):
                (key_len,) = struct.unpack_from("<I", body, offset)
                offset += 4
                key = body[offset : offset + key_len].decode("utf-8")
                offset += key_len
                vec = np.frombuffer(body[offset : offset + vec_bytes], dtype="<f8").copy()
                if vec.shape[0] != dim:
                    raise CorruptIndexError(f"{path} is truncated")
                offset += vec_bytes
                index.add(key, vec)
            if offset != len(body):
                raise CorruptIndexError(f"{path} has {len(body) - offset} trailing bytes")
        except (struct.error, UnicodeDecodeError) as exc:
            raise CorruptIndexError(f"{path} is structurally invalid: {exc}") from exc
        return index
