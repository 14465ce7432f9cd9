"""Compare the compiled kernels against the pure-Python fallback.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Both implementations are exercised on the same inputs; results are verified
to agree before timings are reported, so the benchmark doubles as a smoke
test for the dispatch seam.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from heritagebot import _kernels_py
from heritagebot.embedding import hash_terms, tokenize

try:
    from heritagebot import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def timeit(fn, *args, repeat: int = 5) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_accumulate(n_texts: int, dim: int) -> None:
    rng = np.random.default_rng(0)
    words = ["palace", "gate", "shrine", "seoul", "jongno", "temple", "fortress",
             "village", "royal", "tomb", "pavilion", "hanok", "dong", "gu"]
    texts = [
        " ".join(rng.choice(words, size=rng.integers(4, 12)))
        for _ in range(n_texts)
    ]
    term_lists = [hash_terms(tokenize(text)) for text in texts]

    def run(module):
        for terms in term_lists:
            module.fnv1a_accumulate(terms, dim)

    sample = term_lists[0]
    if _kernels_c is not None:
        assert (
            _kernels_c.fnv1a_accumulate(sample, dim).tobytes()
            == _kernels_py.fnv1a_accumulate(sample, dim).tobytes()
        )
    py = timeit(run, _kernels_py)
    line = f"fnv1a_accumulate  {n_texts} texts, dim {dim}:  python {py * 1e3:8.2f} ms"
    if _kernels_c is not None:
        c = timeit(run, _kernels_c)
        line += f"  compiled {c * 1e3:8.2f} ms  ({py / c:5.1f}x)"
    print(line)


def bench_dot_scores(rows: int, dim: int, queries: int) -> None:
    rng = np.random.default_rng(1)
    matrix = np.ascontiguousarray(rng.normal(size=(rows, dim)))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    qs = [np.ascontiguousarray(rng.normal(size=dim)) for _ in range(queries)]

    def run(module):
        for q in qs:
            module.dot_scores(matrix, q)

    if _kernels_c is not None:
        assert np.allclose(
            _kernels_c.dot_scores(matrix, qs[0]), _kernels_py.dot_scores(matrix, qs[0])
        )
    py = timeit(run, _kernels_py)
    line = f"dot_scores  {rows}x{dim}, {queries} queries:  python {py * 1e3:8.2f} ms"
    if _kernels_c is not None:
        c = timeit(run, _kernels_c)
        line += f"  compiled {c * 1e3:8.2f} ms  ({py / c:5.1f}x)"
    print(line)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dim", type=int, default=256)
    args = parser.parse_args()

    if _kernels_c is None:
        print("compiled kernels not available; timing the fallback only\n")
    bench_accumulate(2000, args.dim)
    bench_accumulate(20000, args.dim)
    bench_dot_scores(1000, args.dim, 200)
    bench_dot_scores(10000, args.dim, 200)


if __name__ == "__main__":
    main()
