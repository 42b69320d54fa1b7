"""Items, coverings, validity checking and the group decomposition.

An input sequence is a list of dyadic sizes in the open interval (0, 1).
A covering assigns every item to exactly one bin; bins with level >= 1 are
covered.  For a grouping parameter k, items split into t-items (size in
[1/t, 1/(t-1)) for t = 2..k) and small items (size < 1/k); covered bins of
a reference covering are then grouped by the multiset of their t-item
types, with small-only bins forming their own group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .dyadic import ONE, ZERO, Dyadic, dyadic_sum, parse_dyadic

__all__ = [
    "ROLE_PLAIN",
    "ROLE_SMALL_DNF",
    "ROLE_RESERVED_BLACK",
    "ROLE_RESERVED_WHITE",
    "SMALL_GROUP",
    "Item",
    "Bin",
    "Covering",
    "GroupedPartition",
    "ValidationReport",
    "classify_item",
    "covering_score",
    "validate_covering",
    "partition_groups",
    "parse_instance",
    "format_instance",
    "covering_to_jsonl",
    "covering_from_jsonl",
]

ROLE_PLAIN = "plain"
ROLE_SMALL_DNF = "small-dnf"
ROLE_RESERVED_BLACK = "reserved-black"
ROLE_RESERVED_WHITE = "reserved-white"

# group key for bins covered by small items only
SMALL_GROUP: tuple[int, ...] = ()


@dataclass(frozen=True)
class Item:
    size: Dyadic
    seq_index: int


@dataclass
class Bin:
    items: list[int] = field(default_factory=list)  # seq indices
    level: Dyadic = ZERO
    role: str = ROLE_PLAIN

    @property
    def covered(self) -> bool:
        return self.level >= ONE

    def add(self, seq_index: int, size: Dyadic) -> None:
        self.items.append(seq_index)
        self.level = self.level + size


@dataclass
class Covering:
    bins: list[Bin]
    n_items: int

    def assignment(self) -> dict[int, int]:
        """seq index -> bin index; duplicates keep the last bin seen."""
        out: dict[int, int] = {}
        for b, bin_ in enumerate(self.bins):
            for idx in bin_.items:
                out[idx] = b
        return out


def classify_item(size: Dyadic, k: int) -> Optional[int]:
    """Return t for a t-item (size in [1/t, 1/(t-1))), or None for small.

    The intervals are closed on the left: size exactly 1/t is a t-item.
    """
    if k < 2:
        raise ValueError("k must be >= 2")
    if not (ZERO < size < ONE):
        raise ValueError(f"item size {size} outside (0, 1)")
    fr = size.to_fraction()
    if fr < Fraction(1, k):
        return None
    for t in range(2, k + 1):
        if fr >= Fraction(1, t):
            return t
    raise AssertionError("unreachable")


def covering_score(c: Covering) -> int:
    """Number of covered bins."""
    return sum(1 for b in c.bins if b.covered)


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self) -> str:
        return "ok" if self.ok else "; ".join(self.violations)


def validate_covering(sizes: Sequence[Dyadic], c: Covering) -> ValidationReport:
    """Check totality, uniqueness and exact levels.  Never raises."""
    violations: list[str] = []
    if c.n_items != len(sizes):
        violations.append(
            f"covering declares {c.n_items} items, sequence has {len(sizes)}")
    seen: dict[int, int] = {}
    for b, bin_ in enumerate(c.bins):
        for idx in bin_.items:
            if idx < 0 or idx >= len(sizes):
                violations.append(f"bin {b} references unknown item {idx}")
                continue
            if idx in seen:
                violations.append(
                    f"item {idx} assigned to bins {seen[idx]} and {b}")
            seen[idx] = b
        level = dyadic_sum(sizes[i] for i in bin_.items
                           if 0 <= i < len(sizes))
        if level != bin_.level:
            violations.append(
                f"bin {b} level {bin_.level} != exact sum {level}")
    for idx in range(len(sizes)):
        if idx not in seen:
            violations.append(f"item {idx} unassigned")
    return ValidationReport(violations)


@dataclass
class GroupedPartition:
    """Covered-bin counts of a reference covering, keyed by t-item multiset."""

    k: int
    counts: dict[tuple[int, ...], int]

    @property
    def g22(self) -> int:
        return self.counts.get((2, 2), 0)

    @property
    def g2(self) -> int:
        return self.counts.get((2,), 0)

    @property
    def gs(self) -> int:
        return self.counts.get(SMALL_GROUP, 0)

    @property
    def beta(self) -> Optional[Fraction]:
        """(|G22| + |G2|) / |G2|; undefined (None) when |G2| = 0."""
        if self.g2 == 0:
            return None
        return Fraction(self.g22 + self.g2, self.g2)

    @property
    def t2_reference(self) -> int:
        """2|G22| + |G2|: the 2-items used by the reference covering."""
        return 2 * self.g22 + self.g2

    def total(self) -> int:
        return sum(self.counts.values())


def partition_groups(sizes: Sequence[Dyadic], c: Covering,
                     k: int) -> GroupedPartition:
    """Group the covered bins of c by their multiset of t-item types."""
    counts: dict[tuple[int, ...], int] = {}
    for bin_ in c.bins:
        if not bin_.covered:
            continue
        types = sorted(t for idx in bin_.items
                       if (t := classify_item(sizes[idx], k)) is not None)
        key = tuple(types)
        counts[key] = counts.get(key, 0) + 1
    return GroupedPartition(k, counts)


# -- instance and covering file formats ----------------------------------------


def parse_instance(text: str) -> list[Dyadic]:
    """One dyadic size per line; '#' starts a comment."""
    sizes = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            size = parse_dyadic(line)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        if not (ZERO < size < ONE):
            raise ValueError(f"line {lineno}: size {size} outside (0, 1)")
        sizes.append(size)
    return sizes


def format_instance(sizes: Sequence[Dyadic]) -> str:
    return "".join(f"{s}\n" for s in sizes)


def covering_to_jsonl(c: Covering) -> str:
    """One bin per line: index, role, item indices and exact level."""
    lines = []
    for i, bin_ in enumerate(c.bins):
        lines.append(json.dumps({
            "bin": i,
            "role": bin_.role,
            "items": bin_.items,
            "level": str(bin_.level),
        }))
    return "\n".join(lines) + ("\n" if lines else "")


def covering_from_jsonl(text: str, sizes: Sequence[Dyadic]) -> Covering:
    bins = []
    for raw in text.splitlines():
        if not raw.strip():
            continue
        rec = json.loads(raw)
        items = list(rec["items"])
        bin_ = Bin(items=items,
                   level=dyadic_sum(sizes[i] for i in items),
                   role=rec.get("role", ROLE_PLAIN))
        declared = rec.get("level")
        if declared is not None and parse_dyadic(declared) != bin_.level:
            raise ValueError(f"bin {rec.get('bin')}: declared level {declared} "
                             f"does not match item sizes")
        bins.append(bin_)
    return Covering(bins=bins, n_items=len(sizes))
