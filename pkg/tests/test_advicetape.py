"""Tape bit operations, self-delimiting codecs, and the ADV1 dump."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bincover.advicetape import (
    AdviceTape,
    BitBudgetReport,
    DecodeError,
    TapeUnderflowError,
)
from bincover.dyadic import CEIL, FLOOR, Dyadic, ceil_approx, floor_approx, parse_dyadic

dyadics = st.builds(Dyadic,
                    st.integers(min_value=1, max_value=(1 << 40) - 1),
                    st.integers(min_value=-40, max_value=10))


class TestRawBits:
    def test_round_trip(self):
        tape = AdviceTape()
        tape.write_bits([1, 0, 1])
        assert tape.read_bits(3) == [1, 0, 1]

    def test_underflow_on_empty(self):
        tape = AdviceTape()
        with pytest.raises(TapeUnderflowError):
            tape.read_bits(1)

    def test_zeros_block(self):
        tape = AdviceTape()
        tape.write_bits([0] * 64)
        assert tape.read_bits(64) == [0] * 64

    def test_rejects_non_bits(self):
        tape = AdviceTape()
        with pytest.raises(ValueError):
            tape.write_bits([2])


class TestEliasGamma:
    def test_one_is_single_bit(self):
        tape = AdviceTape()
        tape.write_self_delim_uint(1)
        assert tape.bits_written == 1
        assert tape.read_self_delim_uint() == 1

    def test_five_hand_computed(self):
        # 5 = 101b, so gamma(5) = 00 101
        tape = AdviceTape()
        tape.write_self_delim_uint(5)
        assert tape.bits_written == 5
        tape.rewind()
        assert tape.read_bits(5) == [0, 0, 1, 0, 1]

    def test_exhaustive_round_trip(self):
        tape = AdviceTape()
        for u in range(1, 4097):
            tape.write_self_delim_uint(u)
        for u in range(1, 4097):
            assert tape.read_self_delim_uint() == u

    @given(st.integers(min_value=1, max_value=10 ** 9))
    def test_length_contract(self, u):
        tape = AdviceTape()
        tape.write_self_delim_uint(u)
        assert tape.bits_written == 2 * (u.bit_length() - 1) + 1

    def test_truncated_code_raises_decode_error(self):
        tape = AdviceTape()
        tape.write_bits([0, 0, 1])  # promises two more payload bits
        with pytest.raises(DecodeError):
            tape.read_self_delim_uint()


class TestApproxCodec:
    def test_spec_examples(self):
        tape = AdviceTape()
        tape.write_approx(parse_dyadic("0.6875"), 2, FLOOR)
        assert tape.read_approx(2) == parse_dyadic("0.5")
        tape.write_approx(Dyadic(13), 2, FLOOR)
        assert tape.read_approx(2) == Dyadic(12)

    def test_ceil_mode(self):
        tape = AdviceTape()
        tape.write_approx(parse_dyadic("0.6875"), 2, CEIL)
        assert tape.read_approx(2) == parse_dyadic("0.75")

    def test_ceil_carry_collapses_mantissa(self):
        # ceil_2(15) = 16: the carry leaves a single significant bit
        tape = AdviceTape()
        tape.write_approx(Dyadic(15), 2, CEIL)
        assert tape.read_approx(2) == Dyadic(16)

    @given(dyadics, st.integers(min_value=1, max_value=16))
    def test_floor_round_trip(self, v, b):
        tape = AdviceTape()
        tape.write_approx(v, b, FLOOR)
        assert tape.read_approx(b) == floor_approx(v, b)

    @given(dyadics, st.integers(min_value=1, max_value=16))
    def test_ceil_round_trip(self, v, b):
        tape = AdviceTape()
        tape.write_approx(v, b, CEIL)
        assert tape.read_approx(b) == ceil_approx(v, b)

    def test_property_loop_b8(self):
        import random
        rng = random.Random(20240901)
        tape = AdviceTape()
        values = [Dyadic(rng.randint(1, (1 << 30) - 1), rng.randint(-32, 4))
                  for _ in range(10_000)]
        for v in values:
            tape.write_approx(v, 8, FLOOR)
        for v in values:
            assert tape.read_approx(8) == floor_approx(v, 8)

    @given(st.integers(min_value=0, max_value=10 ** 6),
           st.integers(min_value=4, max_value=16))
    def test_uint_round_trip(self, u, b):
        from bincover.oracle import fl_b_int
        tape = AdviceTape()
        tape.write_uint_approx(u, b)
        assert tape.read_uint_approx(b) == fl_b_int(u, b)


class TestAccounting:
    def test_breakdown_sums(self):
        tape = AdviceTape()
        tape.write_bits([1], "flag")
        tape.write_self_delim_uint(5, "count")
        tape.write_approx(Dyadic(13), 4, FLOOR, "value")
        report = BitBudgetReport.from_tape(tape)
        assert report.bits_written == tape.bits_written
        assert sum(c for _, c in report.breakdown) == report.bits_written
        assert report.field_bits("flag") == 1
        assert report.field_bits("count") == 5


class TestDumpFormat:
    def test_round_trip(self):
        tape = AdviceTape()
        tape.write_bits([1, 0, 1, 1, 0, 0, 1, 0, 1])
        text = tape.dump()
        assert text.startswith("ADV1 9\n")
        loaded = AdviceTape.load(text)
        assert loaded.read_bits(9) == [1, 0, 1, 1, 0, 0, 1, 0, 1]

    def test_empty_tape(self):
        tape = AdviceTape()
        assert AdviceTape.load(tape.dump()).bits_written == 0

    def test_bad_header(self):
        with pytest.raises(DecodeError):
            AdviceTape.load("NOPE 4\nff\n")

    def test_short_payload(self):
        with pytest.raises(DecodeError):
            AdviceTape.load("ADV1 64\nff\n")
