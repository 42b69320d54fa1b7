# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled subset-DP kernel for the exact offline covering optimum.

Item sizes arrive as integers scaled to a common power-of-two denominator
(``one`` is the scaled bin threshold).  ``best(mask)`` is the maximum
number of covered bins buildable from the items in ``mask``, leaving any
leftovers unused:

    best(0)    = 0
    best(mask) = max(best(mask - low),
                     1 + best(mask \\ T)  for covered T containing low)

where ``low`` is the lowest-index item of ``mask`` and T ranges over the
covered subsets that are minimal in prefix order (the DFS stops extending
a subset as soon as it reaches the threshold).  Every covered set contains
such a subset, so the restriction loses nothing.

Mirrors bincover._optkernel_py; keep the two in sync.
"""

from libc.stdlib cimport free, malloc
from libc.string cimport memset


cdef int _cover_best(long long *w, signed char *best, long long one, int n,
                     unsigned int mask) noexcept:
    if mask == 0:
        return 0
    cdef int cached = best[mask]
    if cached >= 0:
        return cached
    cdef int low = 0
    while not (mask >> low) & 1:
        low += 1
    cdef int res = _cover_best(w, best, one, n, mask & (mask - 1))
    cdef int via = _extend(w, best, one, n, mask, 1u << low, w[low], low + 1)
    if via > res:
        res = via
    best[mask] = <signed char> res
    return res


cdef int _extend(long long *w, signed char *best, long long one, int n,
                 unsigned int mask, unsigned int cur, long long s,
                 int start) noexcept:
    cdef int res = 0
    cdef int j, sub
    if s >= one:
        return 1 + _cover_best(w, best, one, n, mask & ~cur)
    for j in range(start, n):
        if (mask >> j) & 1:
            sub = _extend(w, best, one, n, mask, cur | (1u << j), s + w[j],
                          j + 1)
            if sub > res:
                res = sub
    return res


cdef unsigned int _find_cover(long long *w, signed char *best, long long one,
                              int n, unsigned int mask, unsigned int cur,
                              long long s, int start, int target) noexcept:
    cdef unsigned int found
    cdef int j
    if s >= one:
        if 1 + best[mask & ~cur] == target:
            return cur
        return 0
    for j in range(start, n):
        if (mask >> j) & 1:
            found = _find_cover(w, best, one, n, mask, cur | (1u << j),
                                s + w[j], j + 1, target)
            if found:
                return found
    return 0


def solve_cover_partition(weights, one):
    """(score, covered_masks, leftover_mask) for scaled integer weights."""
    cdef int n = len(weights)
    if n == 0:
        return 0, [], 0
    if n > 28:
        raise ValueError("compiled kernel supports at most 28 items")
    cdef long long one_c = one
    cdef long long *w = <long long *> malloc(n * sizeof(long long))
    cdef signed char *best = <signed char *> malloc((<size_t> 1) << n)
    if w == NULL or best == NULL:
        free(w)
        free(best)
        raise MemoryError()
    cdef int i
    for i in range(n):
        w[i] = weights[i]
    memset(best, 0xFF, (<size_t> 1) << n)
    best[0] = 0

    cdef unsigned int full = (1u << n) - 1
    cdef int score, low, target
    cdef unsigned int mask, lowbit, t
    covered = []
    try:
        score = _cover_best(w, best, one_c, n, full)
        mask = full
        while mask:
            low = 0
            while not (mask >> low) & 1:
                low += 1
            lowbit = 1u << low
            if best[mask] == best[mask & (mask - 1)]:
                mask &= mask - 1  # item is a leftover
                continue
            target = best[mask]
            t = _find_cover(w, best, one_c, n, mask, lowbit, w[low], low + 1,
                            target)
            covered.append(int(t))
            mask &= ~t
    finally:
        free(w)
        free(best)
    leftover = full
    for t_mask in covered:
        leftover &= ~t_mask
    return score, covered, int(leftover)
