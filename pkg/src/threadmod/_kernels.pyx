# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled DAG kernels over uint64 bitsets; same contract as _kernels_py."""

from libc.stdint cimport uint64_t
from libc.stdlib cimport calloc, free, malloc


cdef int _topo(int n, list src, list dst, int *order, list succ) except -1:
    cdef int *indeg = <int *>calloc(n if n > 0 else 1, sizeof(int))
    cdef int *stack = <int *>malloc((n if n > 0 else 1) * sizeof(int))
    cdef int top = 0, k = 0, i, j, b
    if indeg == NULL or stack == NULL:
        free(indeg)
        free(stack)
        raise MemoryError()
    for b in dst:
        indeg[b] += 1
    for i in range(n):
        if indeg[i] == 0:
            stack[top] = i
            top += 1
    while top:
        top -= 1
        i = stack[top]
        order[k] = i
        k += 1
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                stack[top] = j
                top += 1
    free(indeg)
    free(stack)
    return k


def maximal_predecessors(int n, src, dst, queries):
    """For each ``(target, candidates)``, the maximal candidates strictly below
    ``target``; None when the graph has a cycle."""
    cdef list s = list(src), d = list(dst)
    cdef int words = (n + 63) // 64 if n > 0 else 1
    cdef list succ = [[] for _ in range(n)]
    cdef list preds = [[] for _ in range(n)]
    cdef int a, b, i, p, w, k, t, c, e
    cdef uint64_t *anc
    cdef uint64_t *row
    cdef uint64_t *prow
    cdef int *order
    for a, b in zip(s, d):
        succ[a].append(b)
        preds[b].append(a)
    order = <int *>malloc((n if n > 0 else 1) * sizeof(int))
    anc = <uint64_t *>calloc(<size_t>(n if n > 0 else 1) * words, sizeof(uint64_t))
    if order == NULL or anc == NULL:
        free(order)
        free(anc)
        raise MemoryError()
    try:
        if _topo(n, s, d, order, succ) != n:
            return None
        for k in range(n):
            i = order[k]
            row = anc + <size_t>i * words
            for p in preds[i]:
                prow = anc + <size_t>p * words
                for w in range(words):
                    row[w] |= prow[w]
                row[p >> 6] |= (<uint64_t>1) << (p & 63)
        out = []
        for target, cands in queries:
            t = target
            row = anc + <size_t>t * words
            below = [c for c in cands if (row[(<int>c) >> 6] >> ((<int>c) & 63)) & 1]
            keep = []
            for c in below:
                dominated = False
                for e in below:
                    prow = anc + <size_t>e * words
                    if (prow[c >> 6] >> (c & 63)) & 1:
                        dominated = True
                        break
                if not dominated:
                    keep.append(c)
            keep.sort()
            out.append(keep)
        return out
    finally:
        free(order)
        free(anc)
