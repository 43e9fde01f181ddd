# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Levenshtein kernel. Pairwise scoring is the hot loop of candidate
generation; this mirrors `pyfallback.levenshtein` exactly."""

from libc.stdlib cimport free, malloc


def levenshtein(str a, str b):
    """Edit distance (insert/delete/substitute, unit costs) between two strings."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef int *prev = <int *> malloc((lb + 1) * sizeof(int))
    cdef int *curr = <int *> malloc((lb + 1) * sizeof(int))
    if prev == NULL or curr == NULL:
        if prev != NULL:
            free(prev)
        if curr != NULL:
            free(curr)
        raise MemoryError()
    cdef int *tmp
    cdef Py_ssize_t i, j
    cdef int d, cand
    cdef Py_UCS4 ca
    try:
        for j in range(lb + 1):
            prev[j] = <int> j
        for i in range(1, la + 1):
            curr[0] = <int> i
            ca = a[i - 1]
            for j in range(1, lb + 1):
                d = prev[j] + 1
                cand = curr[j - 1] + 1
                if cand < d:
                    d = cand
                cand = prev[j - 1] + (0 if ca == <Py_UCS4> b[j - 1] else 1)
                if cand < d:
                    d = cand
                curr[j] = d
            tmp = prev
            prev = curr
            curr = tmp
        return prev[lb]
    finally:
        free(prev)
        free(curr)
