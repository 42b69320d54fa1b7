"""Exact offline optimum, the load upper bound, and canonicalization.

The optimum is a maximum-cardinality partition of the items into covered
bins (leftovers go into one uncovered bin).  ``exact_opt`` runs a
memoized DP over item subsets; the hot kernel is a compiled extension
when available, with a pure-Python fallback selected at import
(``BINCOVER_PURE=1`` forces the fallback).  ``enumerate_partitions_score``
is an independent brute force over all set partitions, kept as the test
oracle for the DP.

Canonicalization rewrites a reference covering so the single-2-item bins
hold the largest 2-items (always score-preserving: a pair of 2-items
covers a bin regardless of which two they are) and, where it does not
break coverage, moves the smallest black items into those bins.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .dyadic import HALF, ONE, ZERO, Dyadic, dyadic_sum
from .model import (
    ROLE_PLAIN,
    Bin,
    Covering,
    covering_score,
    partition_groups,
    validate_covering,
)

__all__ = [
    "KERNEL",
    "OptResult",
    "InstanceTooLargeError",
    "load_upper_bound",
    "exact_opt",
    "enumerate_partitions_score",
    "canonicalize",
    "solve_cover_partition_pure",
    "solve_cover_partition_compiled",
]

try:
    from ._optkernel_py import solve_cover_partition as solve_cover_partition_pure
except ImportError:  # pragma: no cover
    solve_cover_partition_pure = None

try:
    from ._optkernel import solve_cover_partition as solve_cover_partition_compiled
except ImportError:
    solve_cover_partition_compiled = None

if os.environ.get("BINCOVER_PURE") or solve_cover_partition_compiled is None:
    _solve = solve_cover_partition_pure
    KERNEL = "pure"
else:
    _solve = solve_cover_partition_compiled
    KERNEL = "compiled"

# compiled kernel limits: 28-bit masks, int64 partial sums
_COMPILED_MAX_N = 28
_COMPILED_SUM_BITS = 62

DEFAULT_OPT_LIMIT = 18


class InstanceTooLargeError(ValueError):
    """exact_opt refused the instance; use a generator-certified covering."""


@dataclass
class OptResult:
    covering: Covering
    score: int
    method: str  # "dp" or "enum"


def load_upper_bound(sizes: Sequence[Dyadic]) -> int:
    """floor(sum of sizes): no covering can beat the total load."""
    return dyadic_sum(sizes).floor_int()


def _scaled_weights(sizes: Sequence[Dyadic]) -> tuple[list[int], int]:
    """Scale all sizes to a common power-of-two denominator, exactly."""
    scale = max((-(s.e) for s in sizes), default=0)
    scale = max(scale, 0)
    weights = [s.m << (scale + s.e) for s in sizes]
    return weights, 1 << scale


def _check_sizes(sizes: Sequence[Dyadic]) -> None:
    for i, s in enumerate(sizes):
        if not (ZERO < s < ONE):
            raise ValueError(f"item {i} has size {s} outside (0, 1)")


def _partition_to_covering(sizes, covered_masks, leftover_mask) -> Covering:
    bins = []
    for mask in covered_masks:
        items = [i for i in range(len(sizes)) if (mask >> i) & 1]
        bins.append(Bin(items=items,
                        level=dyadic_sum(sizes[i] for i in items),
                        role=ROLE_PLAIN))
    if leftover_mask:
        items = [i for i in range(len(sizes)) if (leftover_mask >> i) & 1]
        bins.append(Bin(items=items,
                        level=dyadic_sum(sizes[i] for i in items),
                        role=ROLE_PLAIN))
    return Covering(bins=bins, n_items=len(sizes))


def exact_opt(sizes: Sequence[Dyadic], limit: int = DEFAULT_OPT_LIMIT,
              method: str = "dp") -> OptResult:
    """True optimum for small instances (DP over subsets, Theta(3^n) worst
    case), or by full partition enumeration with method="enum"."""
    _check_sizes(sizes)
    n = len(sizes)
    if n > limit:
        raise InstanceTooLargeError(
            f"{n} items exceeds the exact_opt limit of {limit}; use a "
            "generator-certified reference covering instead")
    if method == "enum":
        score = enumerate_partitions_score(sizes)
        # recover an actual covering via the DP (scores proven equal in tests)
        dp = exact_opt(sizes, limit=limit, method="dp")
        return OptResult(covering=dp.covering, score=score, method="enum")
    if method != "dp":
        raise ValueError(f"unknown method {method!r}")
    weights, one = _scaled_weights(sizes)
    solver = _solve
    if solver is solve_cover_partition_compiled:
        total_bits = (sum(weights)).bit_length()
        if n > _COMPILED_MAX_N or total_bits > _COMPILED_SUM_BITS:
            solver = solve_cover_partition_pure
    score, covered_masks, leftover = solver(weights, one)
    covering = _partition_to_covering(sizes, covered_masks, leftover)
    return OptResult(covering=covering, score=score, method="dp")


def enumerate_partitions_score(sizes: Sequence[Dyadic]) -> int:
    """Brute force: maximum covered-block count over all set partitions.

    Independent of the DP on purpose; restricted-growth enumeration visits
    every partition exactly once, with a sound mass-based bound to skip
    hopeless branches.
    """
    _check_sizes(sizes)
    n = len(sizes)
    if n == 0:
        return 0
    weights, one = _scaled_weights(sizes)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + weights[i]

    best = 0
    blocks: list[int] = []

    def rec(i: int, covered: int, open_mass: int) -> None:
        nonlocal best
        if i == n:
            if covered > best:
                best = covered
            return
        if covered + (open_mass + suffix[i]) // one <= best:
            return
        wi = weights[i]
        for j in range(len(blocks)):
            old = blocks[j]
            blocks[j] = old + wi
            if old >= one:  # adding to an already covered block
                rec(i + 1, covered, open_mass)
            elif old + wi >= one:  # this addition covers the block
                rec(i + 1, covered + 1, open_mass - old)
            else:
                rec(i + 1, covered, open_mass + wi)
            blocks[j] = old
        blocks.append(wi)
        if wi >= one:
            rec(i + 1, covered + 1, open_mass)
        else:
            rec(i + 1, covered, open_mass + wi)
        blocks.pop()

    rec(0, 0, 0)
    return best


# -- canonicalization ------------------------------------------------------------


def canonicalize(c: Covering, sizes: Sequence[Dyadic], b: int,
                 eps: Fraction) -> Covering:
    """Exchange items so the reference covering matches the analysis.

    (i) the single-2-item covered bins receive the |G2| largest 2-items
    (pointwise non-decreasing per bin, so coverage is preserved; pairs of
    2-items cover their bin regardless); (ii) the smallest black items move
    into those bins where the exchange keeps both bins' covered status
    unchanged.  Score and validity are always preserved; (ii) is therefore
    best-effort.
    """
    report = validate_covering(sizes, c)
    if not report.ok:
        raise ValueError(f"cannot canonicalize an invalid covering: {report}")

    new_bins = [Bin(items=list(bin_.items), level=bin_.level, role=bin_.role)
                for bin_ in c.bins]
    out = Covering(bins=new_bins, n_items=c.n_items)

    g2_bins, g22_bins, other_bins = _two_item_bins(sizes, out)
    _exchange_largest_two_items(sizes, out, g2_bins, g22_bins, other_bins)
    _exchange_smallest_blacks(sizes, out, b, eps)
    return out


def _two_item_bins(sizes, c):
    """Bin indices split by 2-item count (covered bins only for G2/G22).

    Covered bins with three or more 2-items stay out of the exchange pool:
    pulling size out of them could uncover them.
    """
    g2_bins, g22_bins, other = [], [], []
    for i, bin_ in enumerate(c.bins):
        twos = sum(1 for idx in bin_.items if sizes[idx] >= HALF)
        if bin_.covered and twos == 1:
            g2_bins.append(i)
        elif bin_.covered and twos == 2:
            g22_bins.append(i)
        elif twos and not bin_.covered:
            other.append(i)
    return g2_bins, g22_bins, other


def _exchange_largest_two_items(sizes, c, g2_bins, g22_bins, other_bins):
    pool = []  # (size, seq) of every 2-item in bins we may touch
    for i in g2_bins + g22_bins + other_bins:
        for idx in c.bins[i].items:
            if sizes[idx] >= HALF:
                pool.append(idx)
    pool.sort(key=lambda idx: (sizes[idx], -idx), reverse=True)

    # current G2 bins ordered by their 2-item size, largest first; the i-th
    # largest pooled 2-item replaces the i-th largest current one, so each
    # G2 bin's level can only grow
    def bin_two(i):
        return next(idx for idx in c.bins[i].items if sizes[idx] >= HALF)

    ordered_g2 = sorted(g2_bins,
                        key=lambda i: (sizes[bin_two(i)], -bin_two(i)),
                        reverse=True)

    assign: dict[int, int] = {}  # seq index -> destination bin
    cursor = 0
    for i in ordered_g2:
        assign[pool[cursor]] = i
        cursor += 1
    for i in g22_bins:
        assign[pool[cursor]] = i
        assign[pool[cursor + 1]] = i
        cursor += 2
    # remaining pooled 2-items keep their current (uncovered/other) bins
    remaining = pool[cursor:]
    sources = []
    for i in other_bins:
        for idx in c.bins[i].items:
            if sizes[idx] >= HALF:
                sources.append(i)
    for idx, i in zip(remaining, sources):
        assign[idx] = i

    for i in g2_bins + g22_bins + other_bins:
        bin_ = c.bins[i]
        bin_.items = [idx for idx in bin_.items if sizes[idx] < HALF]
    for idx, i in assign.items():
        c.bins[i].items.append(idx)
    for i in g2_bins + g22_bins + other_bins:
        bin_ = c.bins[i]
        bin_.items.sort()
        bin_.level = dyadic_sum(sizes[idx] for idx in bin_.items)


def _exchange_smallest_blacks(sizes, c, b, eps):
    # the black threshold needs the oracle's parameter chain; degenerate
    # regimes (no 2-item bins, no good items) have no black concept at all
    from .oracle import black_threshold

    partition = partition_groups(sizes, c, 2)
    d_up = black_threshold(sizes, partition, eps, b)
    if d_up is None:
        return
    g2_bins = {i for i, bin_ in enumerate(c.bins)
               if bin_.covered
               and sum(1 for idx in bin_.items if sizes[idx] >= HALF) == 1}

    def is_black(idx):
        return sizes[idx] < HALF and sizes[idx] >= d_up

    blacks = sorted((idx for idx in range(len(sizes)) if is_black(idx)),
                    key=lambda idx: (sizes[idx], idx))
    owner = c.assignment()
    n_b = sum(1 for i in g2_bins
              if any(is_black(idx) for idx in c.bins[i].items))
    targets = [idx for idx in blacks[:n_b] if owner[idx] not in g2_bins]
    donors = [idx for idx in blacks[n_b:] if owner[idx] in g2_bins]
    donors.sort(key=lambda idx: (sizes[idx], idx), reverse=True)

    for y, x in zip(targets, donors):
        bin_a = c.bins[owner[x]]  # G2 bin losing the bigger black x
        bin_b = c.bins[owner[y]]
        new_a = bin_a.level - sizes[x] + sizes[y]
        new_b = bin_b.level - sizes[y] + sizes[x]
        if new_a < ONE:
            continue  # swap would uncover the G2 bin
        if not bin_b.covered and new_b >= ONE:
            continue  # swap would change the score
        bin_a.items.remove(x)
        bin_a.items.append(y)
        bin_a.items.sort()
        bin_a.level = new_a
        bin_b.items.remove(y)
        bin_b.items.append(x)
        bin_b.items.sort()
        bin_b.level = new_b
        owner[x], owner[y] = owner[y], owner[x]


def opt_score_or_bound(sizes: Sequence[Dyadic],
                       reference: Optional[Covering],
                       limit: int = DEFAULT_OPT_LIMIT
                       ) -> tuple[int, str, Optional[Covering]]:
    """(score, source, covering): exact DP, generator-certified, or load bound."""
    if len(sizes) <= limit:
        result = exact_opt(sizes, limit=limit)
        return result.score, "exact", result.covering
    if reference is not None:
        return covering_score(reference), "certified", reference
    return load_upper_bound(sizes), "load-bound", None
