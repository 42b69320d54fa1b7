"""Online strategies: dual next fit, dual harmonic, dual worst fit, and
the advice-driven two-class strategy.

Every strategy processes the input one item at a time; a placement never
moves.  ``run`` returns the full covering (open and empty bins included).
The advice strategy decodes its tape up front (the model allows reading
before the first item) and mirrors the oracle's field order exactly; see
the oracle module for the layout.

Notation for the advice strategy, all values decoded from the tape:
``mr`` reserved bins are opened, the first ``mb`` black and the rest
white.  2-items route by their running count into pre-subsequence pairs,
reserved-bin fills, pairings with reserved non-good 2-items, and a single
persistent pair lane (at most one dangling 2-item at end of input).
Small items route by the black/white threshold: black items fill the
black reserved bins (band-limited by ``eb``), white items feed dual worst
fit across the white reserved bins until each reaches the target, and
everything else drains into one small-item next-fit lane.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

from .advicetape import AdviceTape, DecodeError
from .dyadic import HALF, ZERO, Dyadic, msb_exponent
from .model import (
    Bin,
    Covering,
    ROLE_PLAIN,
    ROLE_RESERVED_BLACK,
    ROLE_RESERVED_WHITE,
    ROLE_SMALL_DNF,
    classify_item,
)

__all__ = [
    "AdviceMismatchError",
    "Dnf",
    "DualHarmonic",
    "Dh2b",
    "Dh2bAdvice",
    "Dh2bReport",
    "decode_dh2b_advice",
    "dwf_place",
    "run",
    "strategy_from_name",
]

Trace = Optional[Callable[[int, Dyadic, int, str], None]]


class AdviceMismatchError(Exception):
    """Advice and sequence disagree structurally: an oracle bug, not input."""


class Dnf:
    """Dual next fit: one active bin, close on coverage, open a fresh one."""

    name = "dnf"

    def run(self, sizes: Sequence[Dyadic], tape: AdviceTape | None = None,
            trace: Trace = None) -> Covering:
        bins: list[Bin] = []
        active: Bin | None = None
        for i, s in enumerate(sizes):
            if active is None:
                active = Bin(role=ROLE_PLAIN)
                bins.append(active)
            active.add(i, s)
            if trace:
                trace(i, s, len(bins) - 1, "dnf")
            if active.covered:
                active = None
        return Covering(bins=bins, n_items=len(sizes))


class DualHarmonic:
    """DH_k: k size classes, each packed by its own next-fit lane."""

    def __init__(self, k: int):
        if k < 2:
            raise ValueError("k must be >= 2")
        self.k = k

    @property
    def name(self) -> str:
        return f"dhk:{self.k}"

    def run(self, sizes: Sequence[Dyadic], tape: AdviceTape | None = None,
            trace: Trace = None) -> Covering:
        bins: list[Bin] = []
        active: dict[Optional[int], tuple[Bin, int]] = {}
        for i, s in enumerate(sizes):
            lane = classify_item(s, self.k)
            entry = active.get(lane)
            if entry is None:
                bin_ = Bin(role=ROLE_SMALL_DNF if lane is None else ROLE_PLAIN)
                bins.append(bin_)
                entry = (bin_, len(bins) - 1)
                active[lane] = entry
            bin_, bin_idx = entry
            bin_.add(i, s)
            if trace:
                trace(i, s, bin_idx, f"lane:{lane or 'small'}")
            if bin_.covered:
                del active[lane]
        return Covering(bins=bins, n_items=len(sizes))


def dwf_place(levels: Sequence[Dyadic], target: Dyadic) -> Optional[int]:
    """Dual worst fit choice: index of the lowest-level bin still below the
    target, ties to the lowest index; None when every bin reached it."""
    best: Optional[int] = None
    for i, level in enumerate(levels):
        if level < target and (best is None or level < levels[best]):
            best = i
    return best


@dataclass
class Dh2bAdvice:
    """Decoded tape fields (exactly those the selected case dictates)."""

    beta_large: bool
    mr: int = 0
    case: str = ""  # "1", "2a", "2b", "2c"
    subseq: int = 0  # 1..3 for Case 1
    xl: int = 0
    xr: int = 0
    a_good: int = 0  # A (cases 1/2a) or A_L (case 2b)
    d_up: Optional[Dyadic] = None
    mb: int = 0
    sb_down: Optional[Dyadic] = None
    sb_up: Optional[Dyadic] = None
    eb: int = 0
    bits_read: int = 0


def decode_dh2b_advice(tape: AdviceTape, b: int) -> Dh2bAdvice:
    """Read the oracle's fields in their fixed order (see oracle layout)."""
    start = tape.bits_read
    if tape.read_bits(1)[0]:
        adv = Dh2bAdvice(beta_large=True)
        adv.bits_read = tape.bits_read - start
        return adv
    adv = Dh2bAdvice(beta_large=False)
    adv.mr = tape.read_uint_approx(b)
    sel = _read_two_bits(tape)
    if sel < 3:
        adv.case = "1"
        adv.subseq = sel + 1
        adv.a_good = tape.read_uint_approx(b)
    else:
        case_sel = _read_two_bits(tape)
        if case_sel == 0:
            adv.case = "2a"
            adv.xl = tape.read_uint_approx(b)
            adv.xr = tape.read_uint_approx(b)
            adv.a_good = tape.read_uint_approx(b)
        elif case_sel == 1:
            adv.case = "2b"
            adv.xl = tape.read_uint_approx(b)
            adv.xr = tape.read_uint_approx(b)
            adv.a_good = tape.read_uint_approx(b)
        elif case_sel == 2:
            adv.case = "2c"
            adv.xl = tape.read_uint_approx(b)
        else:
            raise DecodeError("reserved case selector value 3")
    adv.d_up = tape.read_approx(b)
    adv.mb = tape.read_uint_approx(b)
    if adv.mb > 0:
        adv.sb_down = tape.read_approx(b)
        adv.eb = tape.read_uint_approx(b)
        cut = msb_exponent(adv.sb_down) - b + 1
        adv.sb_up = adv.sb_down + Dyadic(1, cut)
    adv.bits_read = tape.bits_read - start
    return adv


def _read_two_bits(tape: AdviceTape) -> int:
    hi, lo = tape.read_bits(2)
    return (hi << 1) | lo


@dataclass
class Dh2bReport:
    """Audit record of a detailed run."""

    advice: Dh2bAdvice
    reserved_bins: int = 0
    marked_good: tuple[int, ...] = ()  # covering bin indices (= reserved idx)
    e_band_used: int = 0
    two_items_seen: int = 0
    dangling_pair: bool = False


class Dh2b:
    """The advice strategy with b-bit approximated advice values."""

    def __init__(self, b: int):
        if b < 1:
            raise ValueError("b must be >= 1")
        self.b = b

    @property
    def name(self) -> str:
        return "dh2b"

    def run(self, sizes: Sequence[Dyadic], tape: AdviceTape,
            trace: Trace = None) -> Covering:
        return self.run_detailed(sizes, tape, trace)[0]

    def run_detailed(self, sizes: Sequence[Dyadic], tape: AdviceTape,
                     trace: Trace = None) -> tuple[Covering, Dh2bReport]:
        if tape is None:
            raise ValueError("the advice strategy requires a tape")
        adv = decode_dh2b_advice(tape, self.b)
        if adv.beta_large:
            covering = DualHarmonic(2).run(sizes, trace=trace)
            return covering, Dh2bReport(advice=adv)
        runner = _Dh2bRun(adv, trace)
        for i, s in enumerate(sizes):
            if s >= HALF:
                runner.place_two(i, s)
            else:
                runner.place_small(i, s)
        return runner.finish(len(sizes))


class _Dh2bRun:
    """Mutable per-run state of the advice strategy."""

    def __init__(self, adv: Dh2bAdvice, trace: Trace):
        self.adv = adv
        self.trace = trace
        mr = adv.mr
        self.bins: list[Bin] = [
            Bin(role=ROLE_RESERVED_BLACK if i < adv.mb else ROLE_RESERVED_WHITE)
            for i in range(mr)
        ]
        self.two_of: list[Optional[tuple[Dyadic, int]]] = [None] * mr
        self.two_full: list[bool] = [False] * mr  # holds two 2-items already
        self.marked: list[int] = []
        self.nongood: deque[int] = deque()
        self.next_empty = 0  # next reserved bin without a 2-item
        self.pair_open: Optional[int] = None  # covering index of open pair bin
        self.j2 = 0
        # black bookkeeping: bins fill in index order, so a pointer suffices
        self.next_black = 0
        self.e_used = 0
        # white bookkeeping: heap of (white level, bin index), lazily updated
        self.white_level: dict[int, Dyadic] = {
            i: ZERO for i in range(adv.mb, mr)}
        self.white_heap: list[tuple[Dyadic, int]] = [
            (ZERO, i) for i in range(adv.mb, mr)]
        heapq.heapify(self.white_heap)
        self.small_active: Optional[Bin] = None
        # phase boundaries over the running 2-item count
        a = adv
        if a.case == "1":
            self.pre_end = (a.subseq - 1) * mr
            self.fill_end = self.pre_end + mr
            self.mark_count = max(0, a.a_good - 1)
        elif a.case == "2a":
            self.pre_end = 3 * mr
            self.fill_end = self.pre_end + a.xl + a.xr
            self.mark_count = max(0, a.a_good - 1)
        elif a.case == "2b":
            self.pre_end = 3 * mr
            self.fill_end = self.pre_end + a.xl  # chunk 1
            self.pair2_end = self.fill_end + a.xr  # chunk 2
            self.mark_count = a.a_good
        elif a.case == "2c":
            self.pre_end = 3 * mr + a.xl  # chunk 1 pairs in plain bins
            self.fill_end = self.pre_end  # chunks 2 and 3 fill reserved bins
            self.mark_count = 0
        else:
            raise AdviceMismatchError(f"advice carries no case: {a}")

    # -- 2-items -----------------------------------------------------------

    def place_two(self, i: int, s: Dyadic) -> None:
        a = self.adv
        j = self.j2
        self.j2 += 1
        if a.case in ("1", "2a"):
            if j < self.pre_end:
                self._pair(i, s)
            elif j < self.fill_end:
                self._fill_reserved(i, s)
                if j == self.fill_end - 1:
                    self._mark_good()
            else:
                self._pair_nongood(i, s)
        elif a.case == "2b":
            if j < self.pre_end:
                self._pair(i, s)
            elif j < self.fill_end:
                self._fill_reserved(i, s)
                if j == self.fill_end - 1:
                    self._mark_good()
            elif j < self.pair2_end:
                self._pair_nongood(i, s)
            else:
                self._fill_empty_or_pair(i, s)
        else:  # case 2c
            if j < self.pre_end:
                self._pair(i, s)
            else:
                self._fill_empty_or_pair(i, s)

    def _pair(self, i: int, s: Dyadic) -> None:
        if self.pair_open is None:
            self.bins.append(Bin(role=ROLE_PLAIN))
            self.pair_open = len(self.bins) - 1
            self.bins[-1].add(i, s)
            self._trace(i, s, self.pair_open, "pair-open")
        else:
            self.bins[self.pair_open].add(i, s)
            self._trace(i, s, self.pair_open, "pair-close")
            self.pair_open = None

    def _fill_reserved(self, i: int, s: Dyadic) -> None:
        if self.next_empty >= self.adv.mr:
            raise AdviceMismatchError(
                "reserved-bin fill overflow: advice promised room")
        idx = self.next_empty
        self.next_empty += 1
        self.bins[idx].add(i, s)
        self.two_of[idx] = (s, i)
        self._trace(i, s, idx, "reserved-fill")

    def _fill_empty_or_pair(self, i: int, s: Dyadic) -> None:
        if self.next_empty < self.adv.mr:
            idx = self.next_empty
            self.next_empty += 1
            self.bins[idx].add(i, s)
            self.two_of[idx] = (s, i)
            self._trace(i, s, idx, "reserved-tail")
        else:
            self._pair(i, s)

    def _pair_nongood(self, i: int, s: Dyadic) -> None:
        if self.nongood:
            idx = self.nongood.popleft()
            self.bins[idx].add(i, s)
            self.two_full[idx] = True
            self._trace(i, s, idx, "reserved-pair")
        else:
            self._pair(i, s)

    def _mark_good(self) -> None:
        # largest first, ties to the earlier arrival
        holders = [idx for idx in range(self.adv.mr)
                   if self.two_of[idx] is not None and not self.two_full[idx]]
        holders.sort(key=lambda idx: (self.two_of[idx][0],
                                      -self.two_of[idx][1]), reverse=True)
        for idx in holders[:self.mark_count]:
            self.marked.append(idx)
        self.nongood = deque(sorted(
            idx for idx in holders[self.mark_count:]))

    # -- small items -------------------------------------------------------

    def place_small(self, i: int, s: Dyadic) -> None:
        a = self.adv
        if s >= a.d_up:
            # black protocol
            if a.mb > 0 and self.next_black < a.mb:
                if s <= a.sb_down:
                    self._place_black(i, s)
                    return
                if s <= a.sb_up and self.e_used < a.eb:
                    self.e_used += 1
                    self._place_black(i, s)
                    return
            self._small_dnf(i, s)
        else:
            # white protocol: dual worst fit until every bin hits the target
            idx = self._dwf_pop(a.d_up)
            if idx is None:
                self._small_dnf(i, s)
                return
            self.bins[idx].add(i, s)
            level = self.white_level[idx] + s
            self.white_level[idx] = level
            if level < a.d_up:
                heapq.heappush(self.white_heap, (level, idx))
            self._trace(i, s, idx, "dwf")

    def _place_black(self, i: int, s: Dyadic) -> None:
        idx = self.next_black
        self.next_black += 1
        self.bins[idx].add(i, s)
        self._trace(i, s, idx, "black")

    def _dwf_pop(self, target: Dyadic) -> Optional[int]:
        heap = self.white_heap
        while heap:
            level, idx = heap[0]
            if level != self.white_level[idx] or level >= target:
                heapq.heappop(heap)
                continue
            heapq.heappop(heap)
            return idx
        return None

    def _small_dnf(self, i: int, s: Dyadic) -> None:
        if self.small_active is None:
            self.small_active = Bin(role=ROLE_SMALL_DNF)
            self.bins.append(self.small_active)
        self.small_active.add(i, s)
        self._trace(i, s, len(self.bins) - 1, "small-dnf")
        if self.small_active.covered:
            self.small_active = None

    def _trace(self, i: int, s: Dyadic, bin_idx: int, tag: str) -> None:
        if self.trace:
            self.trace(i, s, bin_idx, tag)

    def finish(self, n_items: int) -> tuple[Covering, Dh2bReport]:
        covering = Covering(bins=self.bins, n_items=n_items)
        report = Dh2bReport(
            advice=self.adv,
            reserved_bins=self.adv.mr,
            marked_good=tuple(self.marked),
            e_band_used=self.e_used,
            two_items_seen=self.j2,
            dangling_pair=self.pair_open is not None,
        )
        return covering, report


def strategy_from_name(name: str, bits: Optional[int] = None):
    """Parse a strategy id: dnf, dhk:<k>, or dh2b (needs advice bits)."""
    if name == "dnf":
        return Dnf()
    if name.startswith("dhk:"):
        return DualHarmonic(int(name.split(":", 1)[1]))
    if name == "dh2b":
        if bits is None:
            raise ValueError("dh2b needs the advice bit width (--bits)")
        return Dh2b(bits)
    raise ValueError(f"unknown strategy {name!r}")


def run(strategy, sizes: Sequence[Dyadic], tape: AdviceTape | None = None,
        trace: Trace = None) -> Covering:
    """One-pass online run; advice strategies require a tape."""
    return strategy.run(sizes, tape, trace)
