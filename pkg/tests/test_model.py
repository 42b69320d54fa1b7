"""Item classification, covering validity, and the group partition."""

from fractions import Fraction

import pytest

from bincover.dyadic import Dyadic, ONE, parse_dyadic
from bincover.model import (
    Bin,
    Covering,
    classify_item,
    covering_from_jsonl,
    covering_score,
    covering_to_jsonl,
    format_instance,
    parse_instance,
    partition_groups,
    validate_covering,
)
from bincover.strategies import Dnf


def D(text):
    return parse_dyadic(text)


def build_covering(sizes, groups):
    bins = []
    for members in groups:
        level = sum((sizes[i].to_fraction() for i in members), Fraction(0))
        bins.append(Bin(items=list(members),
                        level=Dyadic.from_fraction(level)))
    return Covering(bins=bins, n_items=len(sizes))


class TestClassify:
    def test_half_is_two_item(self):
        assert classify_item(D("0.5"), 2) == 2

    def test_below_half_is_small(self):
        assert classify_item(D("0.484375"), 2) is None

    def test_three_item(self):
        assert classify_item(D("0.375"), 3) == 3

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            classify_item(Dyadic(1), 2)
        with pytest.raises(ValueError):
            classify_item(Dyadic(0), 2)


class TestScoreAndValidate:
    def test_score_counts_covered(self):
        sizes = [D("0.5625"), D("0.5625"), D("0.5"), D("0.375")]
        c = build_covering(sizes, [[0, 1], [2, 3]])
        assert covering_score(c) == 1  # second bin at 0.875

    def test_empty_covering(self):
        c = Covering(bins=[], n_items=0)
        assert covering_score(c) == 0
        assert validate_covering([], c).ok

    def test_score_invariant_under_reordering(self):
        sizes = [D("0.5"), D("0.5"), D("0.25"), D("0.8125")]
        a = build_covering(sizes, [[0, 1], [2, 3]])
        b = build_covering(sizes, [[3, 2], [1, 0]])
        assert covering_score(a) == covering_score(b)

    def test_validate_passes_on_dnf(self):
        import random
        rng = random.Random(5)
        for _ in range(50):
            sizes = [Dyadic(rng.randint(1, 1023), -10)
                     for _ in range(rng.randint(1, 40))]
            covering = Dnf().run(sizes)
            assert validate_covering(sizes, covering).ok

    def test_detects_unassigned(self):
        sizes = [D("0.5"), D("0.5")]
        c = build_covering(sizes, [[0]])
        report = validate_covering(sizes, c)
        assert not report.ok
        assert any("unassigned" in v for v in report.violations)

    def test_detects_double_assignment(self):
        sizes = [D("0.5"), D("0.5")]
        c = build_covering(sizes, [[0, 1], [1]])
        report = validate_covering(sizes, c)
        assert not report.ok
        assert any("assigned to bins" in v for v in report.violations)

    def test_detects_wrong_level(self):
        sizes = [D("0.5")]
        c = Covering(bins=[Bin(items=[0], level=ONE)], n_items=1)
        assert not validate_covering(sizes, c).ok


class TestPartitionGroups:
    def test_k2_example(self):
        # one {2,2} bin, one {2}+smalls bin, one small-only bin
        sizes = [D("0.5625"), D("0.5625"),
                 D("0.578125"), D("0.28125"), D("0.1875"),
                 D("0.40625"), D("0.40625"), D("0.25")]
        c = build_covering(sizes, [[0, 1], [2, 3, 4], [5, 6, 7]])
        part = partition_groups(sizes, c, 2)
        assert part.g22 == 1 and part.g2 == 1 and part.gs == 1
        assert part.beta == 2
        assert part.t2_reference == 3
        assert part.total() == covering_score(c)

    def test_all_small_beta_none(self):
        sizes = [D("0.25")] * 4
        c = build_covering(sizes, [[0, 1, 2, 3]])
        part = partition_groups(sizes, c, 2)
        assert part.g2 == 0 and part.beta is None

    def test_k3_multiset(self):
        sizes = [D("0.546875"), D("0.34375"), D("0.34375")]
        c = build_covering(sizes, [[0, 1, 2]])
        part = partition_groups(sizes, c, 3)
        assert part.counts == {(2, 3, 3): 1}

    def test_uncovered_bins_excluded(self):
        sizes = [D("0.5"), D("0.5"), D("0.5")]
        c = build_covering(sizes, [[0, 1], [2]])
        part = partition_groups(sizes, c, 2)
        assert part.total() == 1


class TestInstanceIO:
    def test_parse_instance_with_comments(self):
        text = "# header\n0.6875\n0b0.1011  # same value\n\n0.5\n"
        sizes = parse_instance(text)
        assert sizes == [D("0.6875"), D("0.6875"), D("0.5")]

    def test_round_trip(self):
        sizes = [D("0.6875"), D("0.25"), Dyadic(1, -12)]
        assert parse_instance(format_instance(sizes)) == sizes

    def test_rejects_non_dyadic(self):
        with pytest.raises(ValueError):
            parse_instance("0.6\n")

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            parse_instance("1.5\n")

    def test_covering_jsonl_round_trip(self):
        sizes = [D("0.5"), D("0.5"), D("0.25")]
        c = build_covering(sizes, [[0, 1], [2]])
        text = covering_to_jsonl(c)
        loaded = covering_from_jsonl(text, sizes)
        assert [b.items for b in loaded.bins] == [[0, 1], [2]]
        assert validate_covering(sizes, loaded).ok
