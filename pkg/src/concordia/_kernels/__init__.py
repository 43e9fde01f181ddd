"""Scoring kernels with a compiled fast path.

The Cython extension is optional: when it failed to build (or was not built),
the pure-Python implementation is selected at import time. `BACKEND` reports
which one is active; `benchmarks/bench_similarity.py` compares the two.
"""

from __future__ import annotations

try:
    from concordia._kernels._editdist import levenshtein

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on the build environment
    from concordia._kernels.pyfallback import levenshtein

    BACKEND = "python"


def edit_similarity(a: str, b: str) -> float:
    """Character-level similarity: 1 - levenshtein / max length, in [0, 1].

    Two empty strings are identical, hence 1.0.
    """
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


__all__ = ["levenshtein", "edit_similarity", "BACKEND"]
