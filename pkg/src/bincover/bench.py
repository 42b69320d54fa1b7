"""Instance generators with certified optima, the experiment runner, and
CSV emission.

Every generator is deterministic in its seed and emits dyadic sizes in
(0, 1).  The structured families also emit their intended optimal
covering, built from bins that sum to exactly 1, so the covering meets
the load upper bound and is therefore optimal; no solver is involved.

Families
--------
uniform         n iid sizes on a 2^-precision grid (no reference covering).
all_small       bins {1/2-u, 1/2-u, 2u}; adversarial order sends the large
                smalls first so a next-fit lane wastes a third of them.
dnf_adversary   alpha = 1/2 or 1/4: blocks of j = 1/alpha items of size
                alpha-u followed by one of size alpha drive next fit to a
                level of 1+alpha per covered bin, then a dust phase; the
                certified optimum repacks everything into exact unit bins,
                pushing DNF's ratio to 1/(1+alpha).
csirik_totik    k items of size 1-2u plus 2k dust items of size u; the
                optimum pairs each large item with two dust items, while
                class-based strategies burn two large items per bin.
beta_family     a full reference covering with |G22| two-2-item bins of
                {1/2, 1/2}, |G2| bins of one 2-item (1 - d_i) plus small
                items summing to d_i, and |GS| small-only bins; the arrival
                order of the 2-items is shaped so the oracle lands on a
                requested case.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Optional, Sequence

from .dyadic import Dyadic, ONE
from .model import (
    Bin,
    Covering,
    ROLE_PLAIN,
    covering_score,
    partition_groups,
    validate_covering,
)
from .opt import canonicalize, opt_score_or_bound
from .oracle import (
    ChunkSplitInfeasibleError,
    compute_advice,
    compute_alpha,
    compute_m,
    compute_mr,
    compute_ng,
    count_good_singletons,
    eps_from_bits,
    fl_b_int,
    theoretical_bound,
)
from .strategies import Dh2b, strategy_from_name
import random

__all__ = [
    "generate",
    "bits_for_n",
    "measure_ratio",
    "MeasuredRatio",
    "run_experiment",
    "rows_to_csv",
    "CSV_COLUMNS",
    "plotdata",
    "kernel_benchmark",
]


def _frac(value) -> Fraction:
    """Accept Fractions, ints, and decimal/ratio strings from configs."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


def _dy(value) -> Dyadic:
    return Dyadic.from_fraction(_frac(value))


def generate(spec: dict) -> tuple[list[Dyadic], Optional[Covering]]:
    """Build (sizes, reference covering or None) from a generator spec."""
    spec = dict(spec)
    family = spec.pop("family")
    makers = {
        "uniform": _gen_uniform,
        "all_small": _gen_all_small,
        "dnf_adversary": _gen_dnf_adversary,
        "csirik_totik": _gen_csirik_totik,
        "beta_family": _gen_beta_family,
    }
    if family not in makers:
        raise ValueError(f"unknown generator family {family!r}")
    return makers[family](**spec)


def _gen_uniform(n: int, seed: int, precision: int = 16,
                 max_size=None) -> tuple[list[Dyadic], None]:
    rng = random.Random(seed)
    hi = (1 << precision) - 1
    if max_size is not None:
        hi = min(hi, floor(_frac(max_size) * (1 << precision)))
    if hi < 1:
        raise ValueError("max_size below the grid resolution")
    sizes = [Dyadic(rng.randint(1, hi), -precision) for _ in range(n)]
    return sizes, None


def _gen_all_small(bins: int, seed: int, u_exp: int = 10,
                   order: str = "adversarial") -> tuple[list[Dyadic], Covering]:
    """bins * {1/2-u, 1/2-u, 2u}, each summing to exactly 1."""
    u = Dyadic(1, -u_exp)
    a = Dyadic(1, -1) - u
    e = u.mul_pow2(1)
    sizes: list[Dyadic] = []
    ref_bins: list[Bin] = []
    if order == "adversarial":
        sizes = [a] * (2 * bins) + [e] * bins
        for i in range(bins):
            members = [2 * i, 2 * i + 1, 2 * bins + i]
            ref_bins.append(Bin(items=members, level=ONE, role=ROLE_PLAIN))
    elif order == "grouped":
        for i in range(bins):
            base = 3 * i
            sizes.extend([a, a, e])
            ref_bins.append(Bin(items=[base, base + 1, base + 2], level=ONE,
                                role=ROLE_PLAIN))
    else:
        raise ValueError(f"unknown order {order!r}")
    rng = random.Random(seed)  # reserved for future variants; keeps the
    del rng                    # signature uniform across families
    return sizes, Covering(bins=ref_bins, n_items=len(sizes))


def _gen_dnf_adversary(alpha, blocks: int, seed: int = 0,
                       u_exp: int = 12) -> tuple[list[Dyadic], Covering]:
    """Blocks of j*(alpha-u) then alpha; dust phase of j*u per block.

    alpha must be a dyadic 1/j (1/2 or 1/4 in practice) and blocks a
    multiple of j so the certified covering works out exactly.
    """
    alpha_fr = _frac(alpha)
    if alpha_fr.numerator != 1:
        raise ValueError("dnf_adversary needs alpha = 1/j")
    j = alpha_fr.denominator
    if j & (j - 1):
        raise ValueError("alpha must be dyadic (1/2, 1/4, ...)")
    if blocks % j:
        raise ValueError(f"blocks must be a multiple of {j}")
    alpha_d = _dy(alpha_fr)
    u = Dyadic(1, -u_exp)
    small = alpha_d - u
    sizes: list[Dyadic] = []
    for _ in range(blocks):
        sizes.extend([small] * j)
        sizes.append(alpha_d)
    dust_start = len(sizes)
    sizes.extend([u] * (j * blocks))

    # certified optimum: per j blocks, j bins {alpha, (alpha-u)^(j-1), u^(j-1)}
    # and one bin {(alpha-u)^j, u^j}; every bin sums to exactly 1
    smalls = [i for i in range(dust_start) if sizes[i] != alpha_d]
    alphas = [i for i in range(dust_start) if sizes[i] == alpha_d]
    dust = list(range(dust_start, len(sizes)))
    ref_bins: list[Bin] = []
    si = di = 0
    for ai in alphas:
        members = [ai] + smalls[si:si + j - 1] + dust[di:di + j - 1]
        si += j - 1
        di += j - 1
        ref_bins.append(Bin(items=members, level=ONE, role=ROLE_PLAIN))
    while si < len(smalls):
        members = smalls[si:si + j] + dust[di:di + j]
        si += j
        di += j
        ref_bins.append(Bin(items=members, level=ONE, role=ROLE_PLAIN))
    covering = Covering(bins=ref_bins, n_items=len(sizes))
    return sizes, covering


def _gen_csirik_totik(k: int, seed: int = 0,
                      u_exp: int = 10) -> tuple[list[Dyadic], Covering]:
    """k items of 1-2u then 2k dust of u; optimum is k exact unit bins."""
    u = Dyadic(1, -u_exp)
    big = ONE - u.mul_pow2(1)
    sizes = [big] * k + [u] * (2 * k)
    ref_bins = [Bin(items=[i, k + 2 * i, k + 2 * i + 1], level=ONE,
                    role=ROLE_PLAIN) for i in range(k)]
    return sizes, Covering(bins=ref_bins, n_items=len(sizes))


_GS_PATTERNS = (
    ("0.25", "0.25", "0.25", "0.25"),
    ("0.3125", "0.34375", "0.34375"),
    ("0.375", "0.375", "0.25"),
    ("0.4375", "0.3125", "0.25"),
)


def _gen_beta_family(beta, seed: int, opt_size: Optional[int] = None,
                     g2: Optional[int] = None, gs: Optional[int] = None,
                     gs_frac="0.3", advice_bits: Optional[int] = None,
                     case_target: Optional[str] = None,
                     white_frac="0.75", d_base="0.25", step_exp: int = 16,
                     fine: bool = True) -> tuple[list[Dyadic], Covering]:
    beta_fr = _frac(beta)
    if beta_fr < 1:
        raise ValueError("beta must be at least 1")
    if opt_size is not None:
        if gs is None:
            gs = round(_frac(gs_frac) * opt_size)
        g2 = round(Fraction(opt_size - gs, 1) / beta_fr)
        g22 = opt_size - gs - g2
    else:
        if g2 is None:
            raise ValueError("need opt_size or g2")
        gs = gs if gs is not None else round(_frac(gs_frac) * g2)
        g22 = round((beta_fr - 1) * g2)
    if g2 < 1 or g22 < 0 or gs < 0:
        raise ValueError(f"inconsistent sizes: g2={g2} g22={g22} gs={gs}")

    rng = random.Random(seed)
    u = Dyadic(1, -step_exp)
    base = _dy(d_base)
    if (base + Dyadic(g2 + 1, -step_exp)) >= Dyadic(1, -1):
        raise ValueError("d ladder exceeds 1/2; lower g2 or raise step_exp")

    eps = eps_from_bits(advice_bits) if advice_bits else eps_from_bits(16)
    mr = compute_mr(g2, g22, eps)
    b_hint = advice_bits or 16
    mr_b = fl_b_int(mr, b_hint)
    ng = compute_ng(g2, compute_m(mr, eps))

    # d ladder: good bins i < ng get the smallest d (largest 2-items)
    jitter = Dyadic(1, -(step_exp + 8))
    d_vals: list[Dyadic] = []
    for i in range(g2):
        d_i = base + Dyadic(i + 1, -step_exp)
        if fine and i >= max(ng, 0) and rng.random() < 0.5:
            d_i = d_i + jitter
        d_vals.append(d_i)

    two_sizes = [ONE - d for d in d_vals]  # descending
    half = Dyadic(1, -1)
    two_sizes.extend([half] * (2 * g22))
    t2 = len(two_sizes)

    # small items: per G2 bin either one item of d_i (black-ish) or three
    # white pieces d_i/4 + d_i/4 + d_i/2; GS bins follow fixed unit patterns
    white_cut = _frac(white_frac)
    g2_smalls: list[list[Dyadic]] = []
    for i, d_i in enumerate(d_vals):
        split = i >= max(ng, 0) and rng.random() < white_cut
        if split:
            quarter = d_i.mul_pow2(-2)
            g2_smalls.append([quarter, quarter, d_i - quarter - quarter])
        else:
            g2_smalls.append([d_i])
    gs_smalls = [[_dy(x) for x in _GS_PATTERNS[rng.randrange(len(_GS_PATTERNS))]]
                 for _ in range(gs)]

    good_positions = _plan_good_positions(
        t2=t2, s=mr_b, ng=max(ng, 0), g2=g2, beta=beta_fr, eps=eps,
        b=b_hint, case_target=case_target, rng=rng)

    # lay the 2-items into their arrival slots
    goods = two_sizes[:max(ng, 0)]
    others = two_sizes[max(ng, 0):]
    rng.shuffle(goods)
    rng.shuffle(others)
    two_stream: list[Optional[Dyadic]] = [None] * t2
    git = iter(goods)
    oit = iter(others)
    for pos in range(t2):
        two_stream[pos] = next(git) if pos in good_positions else next(oit)

    small_stream = [s for bucket in g2_smalls + gs_smalls for s in bucket]
    rng.shuffle(small_stream)
    sizes = _interleave(two_stream, small_stream)

    # certified reference covering over the final arrival indices
    index_of: dict[Dyadic, list[int]] = {}
    for idx, s in enumerate(sizes):
        index_of.setdefault(s, []).append(idx)

    def take(s: Dyadic) -> int:
        return index_of[s].pop()

    ref_bins = []
    for i, d_i in enumerate(d_vals):
        members = [take(ONE - d_i)] + [take(x) for x in g2_smalls[i]]
        ref_bins.append(Bin(items=sorted(members), level=ONE,
                            role=ROLE_PLAIN))
    for _ in range(g22):
        ref_bins.append(Bin(items=sorted([take(half), take(half)]), level=ONE,
                            role=ROLE_PLAIN))
    for bucket in gs_smalls:
        ref_bins.append(Bin(items=sorted(take(x) for x in bucket), level=ONE,
                            role=ROLE_PLAIN))
    return sizes, Covering(bins=ref_bins, n_items=len(sizes))


def _plan_good_positions(t2: int, s: int, ng: int, g2: int, beta: Fraction,
                         eps: Fraction, b: int, case_target: Optional[str],
                         rng: random.Random) -> set[int]:
    """Choose which 2-item arrival slots carry good items."""
    if ng <= 0:
        return set()
    if case_target is None:
        step = Fraction(t2, ng)
        return {min(t2 - 1, floor(step * i)) for i in range(ng)}
    z = t2 - 3 * s
    if case_target == "1":
        head = min(ng, s)
        rest = ng - head
        positions = set(range(head))
        positions.update(range(3 * s, 3 * s + rest))
        return positions

    # Case 2 targets: keep each of the first three subsequences below the
    # Case 1 trigger and shape the last subsequence's chunks.  The oracle's
    # delta fixed point starts at delta = 0, so the first two chunks must
    # already hold floor(alpha(0) * g2) goods at that first iteration.
    if case_target not in ("2a", "2b", "2c"):
        raise ValueError(f"unknown case target {case_target!r}")
    delta_t = Fraction(1, 22) if case_target == "2a" else Fraction(1, 9)
    alpha0 = compute_alpha(beta, Fraction(0), eps)
    a0_exact = floor(alpha0 * g2)
    a0 = fl_b_int(a0_exact, b)
    g_tail = floor(delta_t * g2) + 2
    quota = 0  # goods allowed in chunk 1 without tripping the 2b threshold
    if case_target == "2c":
        alpha_lt = Fraction(5, 14) * compute_alpha(beta, delta_t, eps)
        quota = max(0, floor(alpha_lt * g2) - 3)
    margin = max(4, a0_exact // 8)
    need_window = max(0, a0_exact + margin - quota)
    cap = max(0, min(a0 - 2, s,
                     -(-(ng - g_tail - quota - need_window) // 3)))
    xlo = max(0, z - s)  # the split scan always starts chunk 1 here
    positions: set[int] = set()
    for zone in range(3):
        zone_start = zone * s
        for i in range(cap):
            positions.add(zone_start + (i * s) // max(cap, 1))
    remaining = ng - len(positions) - g_tail - quota
    if remaining < 0:
        g_tail += remaining
        remaining = 0
    tail_start = t2 - g_tail
    positions.update(range(tail_start, t2))
    base = 3 * s
    positions.update(range(base, base + quota))
    if case_target in ("2a", "2b"):
        span = range(base + quota, base + quota + remaining)
    else:
        offset = base + xlo + max(2, xlo // 16)
        span = range(offset, offset + remaining)
    if span and max(span) >= tail_start:
        raise ValueError(
            f"good placement for target {case_target} does not fit: "
            f"ng={ng}, t2={t2}, window ends {max(span)} >= tail {tail_start}")
    positions.update(span)
    if len(positions) != ng:
        raise ValueError(
            f"good placement for target {case_target} does not fit: "
            f"ng={ng}, t2={t2}, planned={len(positions)}")
    return positions


def _interleave(a: Sequence, b: Sequence) -> list:
    """Deterministic proportional merge of two streams."""
    out = []
    ia = ib = 0
    while ia < len(a) or ib < len(b):
        if ib >= len(b) or (ia < len(a) and ia * len(b) <= ib * len(a)):
            out.append(a[ia])
            ia += 1
        else:
            out.append(b[ib])
            ib += 1
    return out


def bits_for_n(n: int) -> int:
    """b = 2 * ceil(log2 log2 n), floored at 4 (exact integer arithmetic)."""
    t = 0
    while (1 << (1 << t)) < max(n, 2):
        t += 1
    return max(4, 2 * t)


@dataclass
class MeasuredRatio:
    ratio: Optional[Fraction]
    text: str
    additive_gap: Optional[Fraction] = None


def measure_ratio(achieved: int, opt_score: int,
                  predicted: Optional[Fraction] = None) -> MeasuredRatio:
    """Exact achieved/opt ratio plus the additive gap to a predicted bound."""
    if opt_score <= 0:
        return MeasuredRatio(ratio=None, text="undefined (|OPT| = 0)")
    ratio = Fraction(achieved, opt_score)
    gap = None
    if predicted is not None:
        gap = Fraction(achieved) - predicted * opt_score
    return MeasuredRatio(ratio=ratio, text=f"{float(ratio):.6f}",
                         additive_gap=gap)


CSV_COLUMNS = [
    "cell", "family", "generator_params", "n", "strategy", "bits",
    "opt_score", "opt_source", "score", "ratio", "predicted_bound",
    "additive_gap", "advice_bits", "case", "seed", "error", "wall_time_s",
]


def run_cell(index: int, cell: dict, base_seed: int,
             deterministic: bool = False, collect: bool = False) -> dict:
    """Generate, solve, advise, run, validate, and score one experiment cell.

    With collect=True the row additionally carries the in-memory artifacts
    under "_detail" (plan, covering, run report, sizes); those keys are not
    CSV columns and never serialize.
    """
    started = time.monotonic()
    gen_spec = dict(cell["generator"])
    gen_spec.setdefault("seed", base_seed + index)
    strategy_name = cell["strategy"]
    bits = cell.get("bits")
    if (gen_spec.get("family") == "beta_family" and bits
            and "advice_bits" not in gen_spec):
        # the generator shapes good-item arrivals around the same m_R the
        # oracle will compute, so it needs the same bit width
        gen_spec["advice_bits"] = bits
    row = {
        "cell": index,
        "family": gen_spec.get("family", ""),
        "generator_params": json.dumps(
            {k: str(v) for k, v in sorted(gen_spec.items()) if k != "family"},
            separators=(",", ":")),
        "strategy": strategy_name,
        "bits": bits if bits is not None else "",
        "seed": gen_spec.get("seed", ""),
        "error": "",
        "advice_bits": "",
        "case": "",
        "predicted_bound": "",
        "additive_gap": "",
    }
    try:
        sizes, reference = generate(gen_spec)
        row["n"] = len(sizes)
        opt_score, opt_source, ref_cov = opt_score_or_bound(sizes, reference)
        row["opt_score"] = opt_score
        row["opt_source"] = opt_source

        strategy = strategy_from_name(strategy_name, bits)
        predicted = None
        if isinstance(strategy, Dh2b):
            if ref_cov is None:
                raise ValueError("advice strategy needs a reference covering")
            canonical = canonicalize(ref_cov, sizes, bits, eps_from_bits(bits))
            tape, plan = compute_advice(sizes, canonical, bits)
            covering, report = strategy.run_detailed(sizes, tape)
            plan.g = count_good_singletons(plan, sizes, covering)
            partition = partition_groups(sizes, canonical, 2)
            predicted = theoretical_bound(plan, partition)
            row["advice_bits"] = tape.bits_written
            row["case"] = "beta-large" if plan.beta_large else plan.case
            if collect:
                row["_detail"] = {"plan": plan, "covering": covering,
                                  "report": report, "sizes": sizes,
                                  "partition": partition}
        else:
            covering = strategy.run(sizes)
            if collect:
                row["_detail"] = {"covering": covering, "sizes": sizes}

        check = validate_covering(sizes, covering)
        if not check.ok:
            raise AssertionError(f"strategy produced invalid covering: {check}")
        score = covering_score(covering)
        row["score"] = score
        measured = measure_ratio(score, opt_score, predicted)
        row["ratio"] = measured.text if measured.ratio is not None else ""
        if predicted is not None:
            row["predicted_bound"] = f"{float(predicted):.6f}"
            row["additive_gap"] = f"{float(measured.additive_gap):.3f}"
    except (ChunkSplitInfeasibleError, ValueError, AssertionError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        row.setdefault("n", "")
        row.setdefault("opt_score", "")
        row.setdefault("opt_source", "")
        row.setdefault("score", "")
        row.setdefault("ratio", "")
    row["wall_time_s"] = ("" if deterministic
                          else f"{time.monotonic() - started:.6f}")
    return row


def run_experiment(config: dict, deterministic: bool = False,
                   jobs: int = 1, collect: bool = False) -> list[dict]:
    """All cells of a config; rows come back ordered by cell index."""
    base_seed = int(config.get("seed", 0))
    cells = config.get("cells", [])
    if jobs > 1 and not collect:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(run_cell, i, cell, base_seed, deterministic)
                       for i, cell in enumerate(cells)]
            return [f.result() for f in futures]
    return [run_cell(i, cell, base_seed, deterministic, collect)
            for i, cell in enumerate(cells)]


def rows_to_csv(rows: list[dict], config: dict | None = None) -> str:
    """Render rows with a reproducibility header; byte-stable given seeds."""
    out = io.StringIO()
    seed = (config or {}).get("seed", 0)
    out.write("# bincover experiment results\n")
    out.write(f"# prng=random.Random(seed) [Mersenne Twister], seed_base={seed}\n")
    writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: row.get(k, "") for k in CSV_COLUMNS})
    return out.getvalue()


def plotdata(csv_text: str, x: str, y: str) -> str:
    """Two whitespace-separated columns extracted from a results CSV."""
    lines = [ln for ln in csv_text.splitlines() if not ln.startswith("#")]
    reader = csv.DictReader(lines)
    aliases = {"bits": "advice_bits"}
    xcol = aliases.get(x, x)
    ycol = aliases.get(y, y)
    out = []
    for row in reader:
        if row.get(xcol) and row.get(ycol):
            out.append(f"{row[xcol]} {row[ycol]}")
    return "\n".join(out) + ("\n" if out else "")


def kernel_benchmark(ns: Sequence[int] = (12, 14, 16, 18), reps: int = 20,
                     seed: int = 20240917, precision: int = 16) -> list[dict]:
    """Time the compiled and pure subset-DP kernels on the same instances."""
    from . import opt as opt_mod

    rows = []
    rng = random.Random(seed)
    for n in ns:
        instances = []
        for _ in range(reps):
            sizes = [Dyadic(rng.randint(1, (1 << precision) - 1), -precision)
                     for _ in range(n)]
            weights = [s.m << (precision + s.e) for s in sizes]
            instances.append(weights)
        timings = {}
        scores = {}
        for name, solver in (("compiled", opt_mod.solve_cover_partition_compiled),
                             ("pure", opt_mod.solve_cover_partition_pure)):
            if solver is None:
                timings[name] = None
                continue
            t0 = time.perf_counter()
            out = [solver(w, 1 << precision)[0] for w in instances]
            timings[name] = time.perf_counter() - t0
            scores[name] = out
        if len(scores) == 2 and scores["compiled"] != scores["pure"]:
            raise AssertionError("kernel disagreement on benchmark instances")
        row = {"n": n, "reps": reps,
               "compiled_s": timings.get("compiled"),
               "pure_s": timings.get("pure")}
        if timings.get("compiled") and timings.get("pure"):
            row["speedup"] = timings["pure"] / timings["compiled"]
        rows.append(row)
    return rows
