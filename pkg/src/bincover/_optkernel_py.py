"""Pure-Python twin of the compiled subset-DP kernel.

Same recurrence and same API as bincover._optkernel (see the docstring
there); selected at import time when the extension is unavailable or when
BINCOVER_PURE is set.  Arbitrary-precision integers, so it has no overflow
limits, only a speed penalty.
"""

from __future__ import annotations

import sys

__all__ = ["solve_cover_partition"]


def solve_cover_partition(weights, one):
    """(score, covered_masks, leftover_mask) for scaled integer weights."""
    n = len(weights)
    if n == 0:
        return 0, [], 0
    full = (1 << n) - 1
    best: dict[int, int] = {0: 0}
    w = list(weights)

    def cover_best(mask: int) -> int:
        cached = best.get(mask)
        if cached is not None:
            return cached
        low = (mask & -mask).bit_length() - 1
        res = cover_best(mask & (mask - 1))
        via = extend(mask, 1 << low, w[low], low + 1)
        if via > res:
            res = via
        best[mask] = res
        return res

    def extend(mask: int, cur: int, s: int, start: int) -> int:
        if s >= one:
            return 1 + cover_best(mask & ~cur)
        res = 0
        for j in range(start, n):
            if (mask >> j) & 1:
                sub = extend(mask, cur | (1 << j), s + w[j], j + 1)
                if sub > res:
                    res = sub
        return res

    def find_cover(mask: int, cur: int, s: int, start: int, target: int) -> int:
        if s >= one:
            if 1 + best[mask & ~cur] == target:
                return cur
            return 0
        for j in range(start, n):
            if (mask >> j) & 1:
                found = find_cover(mask, cur | (1 << j), s + w[j], j + 1,
                                   target)
                if found:
                    return found
        return 0

    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 10000))
    try:
        score = cover_best(full)
        covered = []
        mask = full
        while mask:
            low = (mask & -mask).bit_length() - 1
            if best[mask] == best[mask & (mask - 1)]:
                mask &= mask - 1
                continue
            t = find_cover(mask, 1 << low, w[low], low + 1, best[mask])
            covered.append(t)
            mask &= ~t
    finally:
        sys.setrecursionlimit(old_limit)
    leftover = full
    for t in covered:
        leftover &= ~t
    return score, covered, leftover
