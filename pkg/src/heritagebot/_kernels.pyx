# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: FNV-1a bucket hashing and row-wise dot products.

Must stay behaviorally identical to heritagebot._kernels_py; the test suite
asserts bitwise equality for the hash path and float64 agreement for the
scoring path.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "compiled"

cdef unsigned long long _FNV_OFFSET = 14695981039346656037ULL
cdef unsigned long long _FNV_PRIME = 1099511628211ULL


cdef inline unsigned long long _fnv1a(const unsigned char* data, Py_ssize_t n) nogil:
    cdef unsigned long long h = _FNV_OFFSET
    cdef Py_ssize_t i
    for i in range(n):
        h ^= data[i]
        h *= _FNV_PRIME
    return h


def fnv1a_hash(bytes term):
    """64-bit FNV-1a over raw bytes."""
    return _fnv1a(<const unsigned char*> term, len(term))


def fnv1a_accumulate(list terms, Py_ssize_t dim):
    """Hash each term into one of `dim` buckets and count occupancy."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(dim, dtype=np.float64)
    cdef double* buckets = <double*> cnp.PyArray_DATA(out)
    cdef bytes term
    cdef unsigned long long h
    for term in terms:
        h = _fnv1a(<const unsigned char*> term, len(term))
        buckets[h % <unsigned long long> dim] += 1.0
    return out


def dot_scores(double[:, ::1] matrix, double[::1] query):
    """Dot product of every matrix row against the query vector."""
    cdef Py_ssize_t n = matrix.shape[0]
    cdef Py_ssize_t dim = matrix.shape[1]
    if query.shape[0] != dim:
        raise ValueError("query dimension does not match matrix")
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double* res = <double*> cnp.PyArray_DATA(out)
    cdef Py_ssize_t i, j
    cdef double acc
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(dim):
                acc += matrix[i, j] * query[j]
            res[i] = acc
    return out
