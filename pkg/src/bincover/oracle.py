"""Offline advice computation for the dual-harmonic advice strategy.

Given the input sequence and a canonicalized reference optimal covering,
the oracle derives every quantity the strategy needs, selects the
placement case, and writes the advice tape.  Everything is computed in
exact rational/dyadic arithmetic.

Parameter chain (per reference covering with group counts |G22|, |G2|):

* ``eps = 2 / 2**(b/2)`` (b must be even so eps is dyadic),
* ``m_R = floor((1-eps)^2 * (27|G2|/121 + 2|G22|/3))``,
* ``m = ceil((1+eps) * m_R)``, ``n_g = |G2| - 2m``,
* the n_g largest input items are the good items; ``1 - d`` is the size
  of the smallest of them,
* black items are the small items of size at least ``ceil_b(d)``; white
  items are the smaller ones.

Dispatch: one leading bit selects plain dual harmonic whenever |G2| = 0
or beta = (|G22|+|G2|)/|G2| is at least 121/107 (that regime is already
good enough), and also for degenerate instances where the subsequence
bookkeeping breaks down.  Otherwise the 2-item subsequence splits into
three blocks of ``floor_b(m_R)`` plus a remainder, and the oracle picks:

* Case 1(i): subsequence i in {1,2,3} already holds enough good items,
* Case 2a/2b/2c: the remainder is split into chunks of XL, XR and Y
  items subject to the five chunk constraints; the good-item fraction
  delta of the last chunk and the fraction alpha_L of the first chunk
  select among the three subcases (thresholds 1/11 and 5*alpha/14).

alpha depends on delta while delta depends on the chunk split, which in
turn depends on alpha; the oracle resolves this with a monotone fixed
point starting from delta = 0.

Tape layout (fixed order; the strategy reads exactly these fields):

    beta_large (1 bit)
    floor_b(m_R)                        [uint field]
    subsequence selector (2 bits; 0..2 = Case 1 on that subsequence)
    case selector (2 bits, only when the selector said "last")
    case fields: Case 1: A | 2a: XL, XR, A | 2b: XL, XR, A_L | 2c: XL
    ceil_b(d)                           [value field]
    floor_b(m_B)                        [uint field]
    floor_b(s_B), floor_b(e_B)          [only when floor_b(m_B) > 0]

Integer fields carry a one-bit zero flag before the b-bit approximation
(the approximation codec itself requires positive values).  ceil_b(s_B)
is never transmitted: the strategy reconstructs it from floor_b(s_B) as
``floor_b(s_B) + 2**(q-b+1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Optional, Sequence

from .advicetape import AdviceTape, BitBudgetReport
from .dyadic import (
    CEIL,
    FLOOR,
    HALF,
    ONE,
    Dyadic,
    ceil_approx,
    floor_approx,
)
from .model import (
    Covering,
    GroupedPartition,
    ROLE_RESERVED_BLACK,
    ROLE_RESERVED_WHITE,
    partition_groups,
    validate_covering,
)

__all__ = [
    "TheoremConstants",
    "THEOREM",
    "OraclePlan",
    "BlackStats",
    "CaseDecision",
    "ChunkSplitInfeasibleError",
    "eps_from_bits",
    "compute_mr",
    "compute_m",
    "compute_ng",
    "compute_alpha",
    "fl_b_int",
    "threshold_d",
    "black_threshold",
    "select_case",
    "black_stats",
    "compute_advice",
    "theoretical_bound",
    "count_good_singletons",
]


@dataclass(frozen=True)
class TheoremConstants:
    """The fixed constants of the main competitive-ratio theorem."""

    beta_threshold: Fraction = Fraction(121, 107)
    target_ratio: Fraction = Fraction(135, 242)
    delta_t: Fraction = Fraction(1, 11)
    alpha_lt_factor: Fraction = Fraction(5, 14)  # alpha_L^T = 5*alpha/14
    rho: Fraction = Fraction(13, 121)
    rho_prime: Fraction = Fraction(26, 121)
    mr_coeffs: tuple[Fraction, Fraction] = (Fraction(27, 121), Fraction(2, 3))
    alpha_formula: tuple[Fraction, Fraction, Fraction, Fraction] = (
        Fraction(685, 1452), Fraction(1, 3), Fraction(1, 4), Fraction(1, 4))


THEOREM = TheoremConstants()


class ChunkSplitInfeasibleError(Exception):
    """No chunk split satisfies the five constraints for this instance."""


def eps_from_bits(b: int) -> Fraction:
    """eps = 2 / 2**(b/2); requires even b >= 4 so eps is dyadic and < 1."""
    if b < 4:
        raise ValueError("advice approximation needs b >= 4")
    if b % 2:
        raise ValueError("b must be even so eps = 2/2^(b/2) is dyadic")
    return Fraction(2, 2 ** (b // 2))


def compute_mr(g2: int, g22: int, eps: Fraction) -> int:
    c2, c22 = THEOREM.mr_coeffs
    return floor((1 - eps) ** 2 * (c2 * g2 + c22 * g22))


def compute_m(mr: int, eps: Fraction) -> int:
    return ceil((1 + eps) * mr)


def compute_ng(g2: int, m: int) -> int:
    return g2 - 2 * m


def compute_alpha(beta: Fraction, delta: Fraction, eps: Fraction) -> Fraction:
    """alpha = 685/1452 - beta/3 - delta/4 - eps/4, clamped at zero."""
    c0, cb, cd, ce = THEOREM.alpha_formula
    alpha = c0 - cb * beta - cd * delta - ce * eps
    return alpha if alpha > 0 else Fraction(0)


def fl_b_int(u: int, b: int) -> int:
    """floor_b of a nonnegative integer (zero passes through)."""
    if u <= 0:
        return 0
    return floor_approx(Dyadic(u), b).floor_int()


def _representable(u: int, b: int) -> bool:
    return u == 0 or fl_b_int(u, b) == u


def threshold_d(sizes: Sequence[Dyadic], ng: int) -> Dyadic:
    """1 - (size of the ng-th largest item); order statistics over all items."""
    if not (1 <= ng <= len(sizes)):
        raise ValueError(f"n_g = {ng} outside [1, {len(sizes)}]")
    order = sorted(sizes, reverse=True)
    return ONE - order[ng - 1]


def black_threshold(sizes: Sequence[Dyadic], partition: GroupedPartition,
                    eps: Fraction, b: int) -> Optional[Dyadic]:
    """ceil_b(d), or None when the instance has no advice regime at all."""
    g2, g22 = partition.g2, partition.g22
    if g2 == 0 or partition.beta >= THEOREM.beta_threshold:
        return None
    mr = compute_mr(g2, g22, eps)
    ng = compute_ng(g2, compute_m(mr, eps))
    if mr < 1 or ng < 1 or ng > len(sizes):
        return None
    d = threshold_d(sizes, ng)
    if d.m <= 0:
        return None
    return ceil_approx(d, b)


@dataclass
class CaseDecision:
    case: str  # "1", "2a", "2b", "2c"
    case1_index: Optional[int]
    alpha: Fraction
    delta: Fraction
    a_exact: int  # floor(alpha * |G2|)
    a_good: int  # A = floor_b(floor(alpha * |G2|))
    a_good_l: int = 0  # A_L = floor_b(floor(alpha_L^T * |G2|)), Case 2b
    alpha_l: Fraction = Fraction(0)
    alpha_r: Fraction = Fraction(0)
    alpha_lt: Fraction = Fraction(0)
    z: int = 0
    xl: int = 0
    xr: int = 0
    y: int = 0


@dataclass
class BlackStats:
    nb: int
    mrb: int
    sb: Optional[Dyadic]
    xb: int
    eb: int
    mb: int


@dataclass
class OraclePlan:
    """Full decision record: everything the tape encodes plus the exact
    unapproximated quantities, for audits."""

    b: int
    eps: Fraction
    g22: int = 0
    g2: int = 0
    gs: int = 0
    t2: int = 0
    beta: Optional[Fraction] = None
    beta_large: bool = True
    degenerate_reason: Optional[str] = None
    mr: int = 0
    mr_b: int = 0
    m: int = 0
    ng: int = 0
    d: Optional[Dyadic] = None
    d_up: Optional[Dyadic] = None
    good_set: frozenset[int] = frozenset()
    subseq_good: tuple[int, ...] = ()
    case: Optional[str] = None
    case1_index: Optional[int] = None
    alpha: Optional[Fraction] = None
    delta: Optional[Fraction] = None
    alpha_l: Optional[Fraction] = None
    alpha_r: Optional[Fraction] = None
    alpha_lt: Optional[Fraction] = None
    a_exact: int = 0
    a_good: int = 0
    a_good_l: int = 0
    z: int = 0
    xl: int = 0
    xr: int = 0
    y: int = 0
    nb: int = 0
    mrb: int = 0
    sb: Optional[Dyadic] = None
    sb_down: Optional[Dyadic] = None
    sb_up: Optional[Dyadic] = None
    xb: int = 0
    eb: int = 0
    mb: int = 0
    mb_b: int = 0
    mw: int = 0
    g: Optional[int] = None  # audit: good 2-items alone in reserved bins
    bit_report: Optional[BitBudgetReport] = None
    tape_layout: tuple[tuple[str, int], ...] = ()


def _good_order(sizes: Sequence[Dyadic]) -> list[int]:
    """Indices by size descending; ties go to the earlier arrival."""
    return sorted(range(len(sizes)), key=lambda i: (sizes[i], -i), reverse=True)


def _iter_representable(lo: int, hi: int, b: int):
    """Yield the b-bit-representable integers in [lo, hi] in order."""
    u = max(lo, 0)
    while u <= hi:
        if u == 0:
            yield 0
            u = 1
            continue
        q = u.bit_length() - 1
        cut = max(0, q - b + 1)
        if (u >> cut) << cut != u:
            u = ((u >> cut) + 1) << cut  # next representable above u
            continue
        yield u
        u += 1 << cut


def _find_split(z: int, a_good: int, a_exact: int, mr_b: int, b: int,
                goods_prefix: Sequence[int]) -> Optional[tuple[int, int, int]]:
    """Smallest feasible Y, then smallest representable XL.

    goods_prefix[w] = good 2-items among the first w items of the last
    subsequence.  Constraints: XL+XR+Y = Z, XL+XR-Y <= A, each pairwise sum
    of {XL, XR, Y} at most floor_b(m_R), first two chunks hold at least
    floor(alpha*|G2|) good items, and XL, XR must be b-bit representable
    because the tape transmits them as their own floor approximations.
    """
    y_min = max(-((a_good - z) // 2) if z > a_good else 0, z - mr_b, 0)
    y_max = min(2 * mr_b - z, mr_b, z)
    for y in range(y_min, y_max + 1):
        w = z - y
        if goods_prefix[w] < a_exact:
            return None  # shrinks further as y grows
        xlo = max(0, w - (mr_b - y))
        xhi = min(w, mr_b - y)
        for xl in _iter_representable(xlo, xhi, b):
            if _representable(w - xl, b):
                return xl, w - xl, y
    return None


def select_case(goods2: Sequence[bool], mr_b: int, t2: int, g2: int,
                beta: Fraction, eps: Fraction, b: int) -> CaseDecision:
    """Pick Case 1(i) or split the last subsequence into chunks.

    Case 1 is checked against the delta = 0 value of alpha (the largest);
    the Case 2 split and the delta it induces are then mutually consistent
    by a monotone fixed point (delta never decreases, so it terminates).
    """
    prefix = [0]
    for flag in goods2:
        prefix.append(prefix[-1] + bool(flag))

    def goods(lo: int, hi: int) -> int:
        return prefix[hi] - prefix[lo]

    alpha0 = compute_alpha(beta, Fraction(0), eps)
    a_exact0 = floor(alpha0 * g2)
    a0 = fl_b_int(a_exact0, b)
    for i in (1, 2, 3):
        if goods((i - 1) * mr_b, i * mr_b) >= a0 - 1:
            return CaseDecision(case="1", case1_index=i, alpha=alpha0,
                                delta=Fraction(0), a_exact=a_exact0, a_good=a0)

    z = t2 - 3 * mr_b
    tail_prefix = [goods(3 * mr_b, 3 * mr_b + w) for w in range(z + 1)]
    delta = Fraction(0)
    for _ in range(g2 + 2):
        alpha = compute_alpha(beta, delta, eps)
        a_exact = floor(alpha * g2)
        a_good = fl_b_int(a_exact, b)
        split = _find_split(z, a_good, a_exact, mr_b, b, tail_prefix)
        if split is None:
            raise ChunkSplitInfeasibleError(
                f"no feasible chunk split: Z={z}, A={a_good}, "
                f"floor_b(m_R)={mr_b}, delta={delta}, beta={beta}, eps={eps}")
        xl, xr, y = split
        delta_next = Fraction(goods(t2 - y, t2), g2)
        if delta_next <= delta:
            # converged; record the fraction the final split actually has
            # (alpha keeps the fixed-point value, which is conservative)
            delta = delta_next
            break
        delta = delta_next
    else:  # pragma: no cover
        raise ChunkSplitInfeasibleError("delta fixed point failed to settle")

    alpha_l = Fraction(goods(3 * mr_b, 3 * mr_b + xl), g2)
    alpha_r = Fraction(goods(3 * mr_b + xl, 3 * mr_b + xl + xr), g2)
    alpha_lt = THEOREM.alpha_lt_factor * alpha
    decision = CaseDecision(case="", case1_index=None, alpha=alpha,
                            delta=delta, a_exact=a_exact, a_good=a_good,
                            alpha_l=alpha_l, alpha_r=alpha_r,
                            alpha_lt=alpha_lt, z=z, xl=xl, xr=xr, y=y)
    if delta <= THEOREM.delta_t:
        decision.case = "2a"
    elif alpha_l >= alpha_lt:
        decision.case = "2b"
        decision.a_good_l = fl_b_int(floor(alpha_lt * g2), b)
    else:
        decision.case = "2c"
    return decision


def black_stats(sizes: Sequence[Dyadic], covering: Covering, d_up: Dyadic,
                mr_b: int, b: int) -> BlackStats:
    """Black-item statistics: n_B over the reference G2 bins, the rest from
    input order statistics."""
    def is_black(idx: int) -> bool:
        return sizes[idx] < HALF and sizes[idx] >= d_up

    nb = 0
    for bin_ in covering.bins:
        if not bin_.covered:
            continue
        twos = sum(1 for idx in bin_.items if sizes[idx] >= HALF)
        if twos == 1 and any(is_black(idx) for idx in bin_.items):
            nb += 1
    mrb = min(mr_b, nb)
    if mrb == 0:
        return BlackStats(nb=nb, mrb=0, sb=None, xb=0, eb=0, mb=0)
    blacks = sorted((idx for idx in range(len(sizes)) if is_black(idx)),
                    key=lambda idx: (sizes[idx], idx))
    smallest = blacks[:mrb]
    sb = sizes[smallest[-1]]
    sb_down = floor_approx(sb, b)
    xb = sum(1 for idx in smallest if sizes[idx] <= sb_down)
    eb = mrb - xb  # remainder lies in (floor_b(s_B), ceil_b(s_B)] by construction
    mb = xb + fl_b_int(eb, b)
    return BlackStats(nb=nb, mrb=mrb, sb=sb, xb=xb, eb=eb, mb=mb)


def compute_advice(sizes: Sequence[Dyadic], ref_covering: Covering,
                   b: int) -> tuple[AdviceTape, OraclePlan]:
    """Write the advice tape for this input and reference covering.

    The reference covering must be valid and should be canonicalized.
    Degenerate instances (no reserved bins, no good items, malformed
    subsequences, or 2-items the reference covering does not use) fall
    back to the one-bit pure-strategy signal.
    """
    eps = eps_from_bits(b)
    report = validate_covering(sizes, ref_covering)
    if not report.ok:
        raise ValueError(f"invalid reference covering: {report}")
    partition = partition_groups(sizes, ref_covering, 2)
    t2 = sum(1 for s in sizes if s >= HALF)
    plan = OraclePlan(b=b, eps=eps, g22=partition.g22, g2=partition.g2,
                      gs=partition.gs, t2=t2, beta=partition.beta)
    tape = AdviceTape()

    degenerate = None
    if partition.g2 == 0:
        degenerate = "no single-2-item bins"
    elif partition.beta >= THEOREM.beta_threshold:
        degenerate = None  # the intended dispatch, not a fallback
        plan.beta_large = True
    if partition.g2 > 0 and partition.beta < THEOREM.beta_threshold:
        mr = compute_mr(partition.g2, partition.g22, eps)
        mr_b = fl_b_int(mr, b)
        m = compute_m(mr, eps)
        ng = compute_ng(partition.g2, m)
        if mr_b < 1:
            degenerate = "no reserved bins at this scale"
        elif ng < 1:
            degenerate = "no good items (n_g <= 0)"
        elif t2 != partition.t2_reference:
            degenerate = (f"sequence has {t2} 2-items but the reference "
                          f"covering uses {partition.t2_reference}")
        elif t2 < 3 * mr_b:
            degenerate = "fewer 2-items than three full subsequences"
        else:
            plan.beta_large = False
            plan.mr, plan.mr_b, plan.m, plan.ng = mr, mr_b, m, ng
    plan.degenerate_reason = degenerate
    if plan.beta_large or degenerate:
        plan.beta_large = True
        tape.write_bits([1], "beta_large")
        plan.bit_report = BitBudgetReport.from_tape(tape)
        plan.tape_layout = plan.bit_report.breakdown
        return tape, plan

    tape.write_bits([0], "beta_large")
    tape.write_uint_approx(plan.mr, b, "mr")

    one_minus_d = sorted(sizes, reverse=True)[plan.ng - 1]
    plan.d = ONE - one_minus_d
    plan.d_up = ceil_approx(plan.d, b)
    plan.good_set = frozenset(_good_order(sizes)[:plan.ng])

    two_positions = [i for i in range(len(sizes)) if sizes[i] >= HALF]
    goods2 = [idx in plan.good_set for idx in two_positions]
    boundaries = [0, plan.mr_b, 2 * plan.mr_b, 3 * plan.mr_b, t2]
    plan.subseq_good = tuple(
        sum(goods2[boundaries[i]:boundaries[i + 1]]) for i in range(4))

    decision = select_case(goods2, plan.mr_b, t2, plan.g2, plan.beta, eps, b)
    plan.case = decision.case
    plan.case1_index = decision.case1_index
    plan.alpha, plan.delta = decision.alpha, decision.delta
    plan.alpha_l, plan.alpha_r = decision.alpha_l, decision.alpha_r
    plan.alpha_lt = decision.alpha_lt
    plan.a_exact, plan.a_good = decision.a_exact, decision.a_good
    plan.a_good_l = decision.a_good_l
    plan.z, plan.xl, plan.xr, plan.y = (decision.z, decision.xl,
                                        decision.xr, decision.y)

    if decision.case == "1":
        tape.write_bits(_two_bits(decision.case1_index - 1), "subseq")
        tape.write_uint_approx(plan.a_exact, b, "a")
    else:
        tape.write_bits(_two_bits(3), "subseq")
        tape.write_bits(_two_bits({"2a": 0, "2b": 1, "2c": 2}[decision.case]),
                        "case")
        if decision.case in ("2a", "2b"):
            tape.write_uint_approx(plan.xl, b, "xl")
            tape.write_uint_approx(plan.xr, b, "xr")
            if decision.case == "2a":
                tape.write_uint_approx(plan.a_exact, b, "a")
            else:
                tape.write_uint_approx(floor(plan.alpha_lt * plan.g2), b,
                                       "a_l")
        else:
            tape.write_uint_approx(plan.xl, b, "xl")

    stats = black_stats(sizes, ref_covering, plan.d_up, plan.mr_b, b)
    plan.nb, plan.mrb, plan.sb = stats.nb, stats.mrb, stats.sb
    plan.xb, plan.eb, plan.mb = stats.xb, stats.eb, stats.mb
    plan.mb_b = fl_b_int(plan.mb, b)
    plan.mw = plan.mr_b - plan.mb_b
    if plan.sb is not None:
        plan.sb_down = floor_approx(plan.sb, b)
        plan.sb_up = ceil_approx(plan.sb, b)

    tape.write_approx(plan.d, b, CEIL, "d_up")
    tape.write_uint_approx(plan.mb, b, "mb")
    if plan.mb_b > 0:
        tape.write_approx(plan.sb, b, FLOOR, "sb_down")
        tape.write_uint_approx(plan.eb, b, "eb")

    plan.bit_report = BitBudgetReport.from_tape(tape)
    plan.tape_layout = plan.bit_report.breakdown
    return tape, plan


def _two_bits(v: int) -> list[int]:
    return [(v >> 1) & 1, v & 1]


def theoretical_bound(plan: OraclePlan,
                      partition: GroupedPartition) -> Fraction:
    """The predicted covered-bin ratio for this plan's case (exact)."""
    if partition.g2 == 0:
        return Fraction(2, 3)
    beta = partition.beta
    two_thirds = Fraction(2, 3)
    if plan.beta_large or plan.case is None:
        return min(Fraction(2 * beta - 1, 1) / (2 * beta), two_thirds)
    if plan.case in ("1", "2a"):
        ratio = (plan.alpha + 2 * beta - 1) / (2 * beta)
    elif plan.case == "2b":
        ratio = ((1 - THEOREM.rho) * (2 * beta - 1)
                 + plan.alpha_lt + 2 * plan.delta) / (2 * beta)
    elif plan.case == "2c":
        ratio = ((1 - THEOREM.rho_prime) * (2 * beta - 1)
                 + 2 * (plan.alpha_r + plan.delta)) / (2 * beta)
    else:  # pragma: no cover
        raise ValueError(f"unknown case {plan.case!r}")
    return min(ratio, two_thirds)


def count_good_singletons(plan: OraclePlan, sizes: Sequence[Dyadic],
                          covering: Covering) -> int:
    """Audit count g: good 2-items sitting alone in reserved bins."""
    g = 0
    for bin_ in covering.bins:
        if bin_.role not in (ROLE_RESERVED_BLACK, ROLE_RESERVED_WHITE):
            continue
        twos = [idx for idx in bin_.items if sizes[idx] >= HALF]
        if len(twos) == 1 and twos[0] in plan.good_set:
            g += 1
    return g
