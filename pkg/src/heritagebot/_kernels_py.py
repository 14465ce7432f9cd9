"""Pure-Python/numpy implementations of the hot kernels.

Drop-in fallback for the compiled heritagebot._kernels extension; the two
must stay behaviorally identical. fnv1a_accumulate is bit-for-bit equal by
construction (64-bit integer hashing, and the counts are small integers
that float64 accumulates exactly in any order).
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_hash(term: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = _FNV_OFFSET
    for byte in term:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def fnv1a_accumulate(terms: list[bytes], dim: int) -> np.ndarray:
    """Hash each term into one of `dim` buckets and count occupancy."""
    out = np.zeros(dim, dtype=np.float64)
    for term in terms:
        out[fnv1a_hash(term) % dim] += 1.0
    return out


def dot_scores(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Dot product of every matrix row against the query vector.

    einsum rather than matrix @ query: BLAS dgemv routes tail rows through a
    different micro-kernel, so identical rows can score one ulp apart
    depending on position, which would make exact score ties (and therefore
    the key tie-break) position-dependent. einsum reduces every row with the
    same loop.
    """
    if matrix.shape[1] != query.shape[0]:
        raise ValueError(f"query dim {query.shape[0]} != matrix dim {matrix.shape[1]}")
    return np.einsum("ij,j->i", matrix, query)
