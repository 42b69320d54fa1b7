"""Strategy behavior: DNF, DH_k, DWF, and the advice strategy's cases."""

import random

import pytest

from bincover.advicetape import AdviceTape, TapeUnderflowError
from bincover.bench import generate
from bincover.dyadic import Dyadic, HALF, parse_dyadic
from bincover.model import (
    ROLE_PLAIN,
    ROLE_RESERVED_BLACK,
    ROLE_RESERVED_WHITE,
    covering_score,
    validate_covering,
)
from bincover.opt import canonicalize
from bincover.oracle import compute_advice, eps_from_bits
from bincover.strategies import (
    Dh2b,
    Dnf,
    DualHarmonic,
    decode_dh2b_advice,
    dwf_place,
    run,
    strategy_from_name,
)


def D(text):
    return parse_dyadic(text)


def oracle_pair(beta, target, seed=3, opt_size=400, b=16):
    """Generate an instance, advice tape, and a detailed run."""
    spec = {"family": "beta_family", "beta": beta, "opt_size": opt_size,
            "seed": seed, "advice_bits": b, "case_target": target}
    sizes, ref = generate(spec)
    canon = canonicalize(ref, sizes, b, eps_from_bits(b))
    tape, plan = compute_advice(sizes, canon, b)
    covering, report = Dh2b(b).run_detailed(sizes, tape)
    return sizes, plan, covering, report


class TestDnf:
    def test_one_pair_covers(self):
        covering = Dnf().run([D("0.625"), D("0.625")])
        assert covering_score(covering) == 1

    def test_four_halves(self):
        covering = Dnf().run([D("0.5")] * 4)
        assert covering_score(covering) == 2

    def test_closes_past_one(self):
        covering = Dnf().run([D("0.6875"), D("0.4375")])
        assert covering.bins[0].level == D("1.125")
        assert covering_score(covering) == 1

    def test_big_item_keeps_bin_open(self):
        covering = Dnf().run([D("0.9921875")])
        assert covering_score(covering) == 0

    def test_triple_family_covers_k_bins(self):
        # (1/2-u, 1/2-u, 2u) repeated k times closes one bin per triple
        u = Dyadic(1, -10)
        block = [HALF - u, HALF - u, u.mul_pow2(1)]
        k = 200
        covering = Dnf().run(block * k)
        assert covering_score(covering) >= k - 1

    def test_covered_bins_close_below_one_plus_max(self):
        # a next-fit bin closes the moment it reaches 1, so its level stays
        # under 1 plus the largest item it could have received
        rng = random.Random(17)
        for _ in range(30):
            sizes = [Dyadic(rng.randint(1, 1023), -10)
                     for _ in range(rng.randint(1, 60))]
            limit = Dyadic(1) + max(sizes)
            covering = Dnf().run(sizes)
            for bin_ in covering.bins:
                if bin_.covered:
                    assert bin_.level < limit


class TestDualHarmonic:
    def test_spec_walkthrough(self):
        # 2-lane covers one bin; 0.9-ish stays open; small lane open
        sizes = [D("0.625"), D("0.6875"), D("0.1875"), D("0.90625")]
        covering = DualHarmonic(2).run(sizes)
        assert covering_score(covering) == 1

    def test_single_class_behaves_like_dnf(self):
        # every size in [1/3, 1/2): DH_4 reduces to one next-fit lane
        rng = random.Random(11)
        sizes = [Dyadic(rng.randint(342, 511), -10) for _ in range(60)]
        dh4 = DualHarmonic(4).run(sizes)
        dnf = Dnf().run(sizes)
        assert covering_score(dh4) == covering_score(dnf)

    def test_no_two_items_matches_dnf_small_lane(self):
        sizes = [D("0.25"), D("0.4375"), D("0.375"), D("0.125")] * 10
        assert (covering_score(DualHarmonic(2).run(sizes))
                == covering_score(Dnf().run(sizes)))


class TestDwfPlace:
    def test_argmin(self):
        levels = [D("0.375"), D("0.125"), D("0.25")]
        assert dwf_place(levels, D("0.4375")) == 1

    def test_all_at_target(self):
        levels = [D("0.5"), D("0.5")]
        assert dwf_place(levels, D("0.5")) is None

    def test_tie_takes_lowest_index(self):
        levels = [D("0.125"), D("0.125")]
        assert dwf_place(levels, D("0.25")) == 0


class TestStrategyParsing:
    def test_names(self):
        assert strategy_from_name("dnf").name == "dnf"
        assert strategy_from_name("dhk:3").k == 3
        assert strategy_from_name("dh2b", 8).b == 8

    def test_dh2b_needs_bits(self):
        with pytest.raises(ValueError):
            strategy_from_name("dh2b")

    def test_dh2b_needs_tape(self):
        with pytest.raises(ValueError):
            run(Dh2b(8), [D("0.5")])


class TestDh2bBetaLarge:
    def test_single_bit_tape_delegates_to_dh2(self):
        tape = AdviceTape()
        tape.write_bits([1])
        sizes = [D("0.625"), D("0.625"), D("0.25")] * 8
        covering, report = Dh2b(8).run_detailed(sizes, tape)
        assert report.advice.beta_large
        assert covering_score(covering) == covering_score(
            DualHarmonic(2).run(sizes))

    def test_underflow_propagates(self):
        tape = AdviceTape()
        tape.write_bits([0])  # claims advice follows, then nothing
        with pytest.raises(TapeUnderflowError):
            Dh2b(8).run(sizes=[D("0.5")], tape=tape)


class TestDh2bCases:
    @pytest.mark.parametrize("beta,target", [
        ("1.02", "1"), ("1.05", "2a"), ("1.06", "2b"), ("1.08", "2c"),
    ])
    def test_cases_run_clean(self, beta, target):
        sizes, plan, covering, report = oracle_pair(beta, target)
        assert plan.case == target
        assert validate_covering(sizes, covering).ok

    @pytest.mark.parametrize("beta,target", [
        ("1.02", "1"), ("1.05", "2a"), ("1.06", "2b"), ("1.08", "2c"),
    ])
    def test_reserved_bins_hold_at_most_two_2items(self, beta, target):
        sizes, plan, covering, report = oracle_pair(beta, target)
        for i in range(report.reserved_bins):
            twos = sum(1 for idx in covering.bins[i].items
                       if sizes[idx] >= HALF)
            assert twos <= 2

    @pytest.mark.parametrize("beta,target", [
        ("1.02", "1"), ("1.05", "2a"), ("1.06", "2b"),
    ])
    def test_marked_good_bins_never_paired(self, beta, target):
        sizes, plan, covering, report = oracle_pair(beta, target)
        for idx in report.marked_good:
            twos = sum(1 for j in covering.bins[idx].items
                       if sizes[j] >= HALF)
            assert twos == 1

    def test_property_ii_pairing(self):
        # cases 1 and 2a: plain bins hold exactly two 2-items (at most one
        # dangling pair bin at end of input), and those bins are covered
        for target in ("1", "2a"):
            sizes, plan, covering, report = oracle_pair("1.05", target)
            dangling = 0
            for bin_ in covering.bins:
                if bin_.role != ROLE_PLAIN:
                    continue
                twos = sum(1 for i in bin_.items if sizes[i] >= HALF)
                if twos == 1:
                    dangling += 1
                else:
                    assert twos == 2
                    assert bin_.covered
            assert dangling <= 1
            assert dangling == (1 if report.dangling_pair else 0)

    def test_roles_split_black_white(self):
        sizes, plan, covering, report = oracle_pair("1.06", "2b")
        blacks = [b for b in covering.bins if b.role == ROLE_RESERVED_BLACK]
        whites = [b for b in covering.bins if b.role == ROLE_RESERVED_WHITE]
        assert len(blacks) == plan.mb_b
        assert len(whites) == plan.mw

    def test_white_levels_below_twice_target(self):
        sizes, plan, covering, report = oracle_pair("1.05", "2a")
        limit = plan.d_up.mul_pow2(1)
        for bin_ in covering.bins:
            if bin_.role != ROLE_RESERVED_WHITE:
                continue
            white = [sizes[i] for i in bin_.items
                     if sizes[i] < HALF and sizes[i] < plan.d_up]
            total = Dyadic(0)
            for s in white:
                total = total + s
            assert total < limit

    def test_black_bins_hold_at_most_one_black(self):
        sizes, plan, covering, report = oracle_pair("1.06", "2b")
        for bin_ in covering.bins:
            if bin_.role != ROLE_RESERVED_BLACK:
                continue
            blacks = [i for i in bin_.items
                      if sizes[i] < HALF and sizes[i] >= plan.d_up]
            assert len(blacks) <= 1

    def test_e_band_respects_cap(self):
        sizes, plan, covering, report = oracle_pair("1.06", "2b")
        assert report.e_band_used <= report.advice.eb


class TestOnlineCausality:
    @pytest.mark.parametrize("target", ["1", "2a", "2b", "2c"])
    def test_prefix_consistency(self, target):
        b = 16
        spec = {"family": "beta_family", "beta": "1.06", "opt_size": 300,
                "seed": 8, "advice_bits": b, "case_target": target}
        sizes, ref = generate(spec)
        canon = canonicalize(ref, sizes, b, eps_from_bits(b))
        tape, plan = compute_advice(sizes, canon, b)
        full = Dh2b(b).run(sizes, tape)
        full_assign = full.assignment()
        for cut in (1, len(sizes) // 3, 2 * len(sizes) // 3, len(sizes) - 1):
            tape.rewind()
            prefix_cov = Dh2b(b).run(sizes[:cut], tape)
            prefix_assign = prefix_cov.assignment()
            for i in range(cut):
                assert prefix_assign[i] == full_assign[i], (target, cut, i)

    def test_dnf_prefix_consistency(self):
        rng = random.Random(2)
        sizes = [Dyadic(rng.randint(1, 1023), -10) for _ in range(80)]
        full = Dnf().run(sizes).assignment()
        for cut in (1, 20, 79):
            part = Dnf().run(sizes[:cut]).assignment()
            assert all(part[i] == full[i] for i in range(cut))


class TestDecodeMirrorsOracle:
    @pytest.mark.parametrize("beta,target", [
        ("1.02", "1"), ("1.05", "2a"), ("1.06", "2b"), ("1.08", "2c"),
    ])
    def test_decoded_fields_match_plan(self, beta, target):
        b = 16
        spec = {"family": "beta_family", "beta": beta, "opt_size": 400,
                "seed": 13, "advice_bits": b, "case_target": target}
        sizes, ref = generate(spec)
        canon = canonicalize(ref, sizes, b, eps_from_bits(b))
        tape, plan = compute_advice(sizes, canon, b)
        adv = decode_dh2b_advice(tape, b)
        assert adv.beta_large == plan.beta_large
        assert adv.mr == plan.mr_b
        assert adv.case == plan.case
        if plan.case == "1":
            assert adv.subseq == plan.case1_index
            assert adv.a_good == plan.a_good
        elif plan.case == "2a":
            assert (adv.xl, adv.xr, adv.a_good) == (plan.xl, plan.xr,
                                                    plan.a_good)
        elif plan.case == "2b":
            assert (adv.xl, adv.xr, adv.a_good) == (plan.xl, plan.xr,
                                                    plan.a_good_l)
        else:
            assert adv.xl == plan.xl
        assert adv.d_up == plan.d_up
        assert adv.mb == plan.mb_b
        if plan.mb_b > 0:
            from bincover.oracle import fl_b_int
            assert adv.sb_down == plan.sb_down
            assert adv.sb_up == plan.sb_up
            assert adv.eb == fl_b_int(plan.eb, b)
        assert adv.bits_read == tape.bits_written
