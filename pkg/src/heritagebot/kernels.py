"""Kernel selection: compiled extension when available, numpy fallback otherwise.

Set HERITAGEBOT_PURE_PYTHON=1 to force the fallback (used by the benchmark
and the equivalence tests).

Selection is per kernel, by measurement (benchmarks/bench_kernels.py):
hashing is scalar integer work where the compiled loop wins ~20x, so it is
taken from the extension when built; the score scan is fastest through
numpy's einsum, so it always comes from the fallback module. Both scan
implementations reduce every matrix row with the same accumulation order,
so equal vectors score bitwise-equal and the top-k key tie-break is
position-independent - BLAS gemv does not guarantee that, which is why
neither path uses matrix @ query (see _kernels_py.dot_scores).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("HERITAGEBOT_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

IMPLEMENTATION: str = _impl.IMPLEMENTATION
HAVE_COMPILED: bool = IMPLEMENTATION == "compiled"

fnv1a_hash = _impl.fnv1a_hash
fnv1a_accumulate = _impl.fnv1a_accumulate
dot_scores = _kernels_py.dot_scores
