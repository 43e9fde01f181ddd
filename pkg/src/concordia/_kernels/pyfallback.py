"""Pure-Python edit distance, used when the compiled extension is unavailable.

Semantics must match `_editdist.levenshtein` exactly; the test suite asserts
agreement between the two on random inputs.
"""

from __future__ import annotations


def levenshtein(a: str, b: str) -> int:
    """Edit distance (insert/delete/substitute, unit costs) between two strings."""
    la, lb = len(a), len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    prev = list(range(lb + 1))
    curr = [0] * (lb + 1)
    for i in range(1, la + 1):
        curr[0] = i
        ca = a[i - 1]
        for j in range(1, lb + 1):
            d = prev[j] + 1
            cand = curr[j - 1] + 1
            if cand < d:
                d = cand
            cand = prev[j - 1] + (0 if ca == b[j - 1] else 1)
            if cand < d:
                d = cand
            curr[j] = d
        prev, curr = curr, prev
    return prev[lb]
