"""Advice tape: bit-level writer/reader with self-delimiting codecs.

The oracle appends bits; the strategy later reads them back in the same
order.  Every write can be labelled so the tape keeps an exact per-field
bit ledger (``BitBudgetReport``).

Codecs:

* Elias gamma for positive integers (``2*floor(log2 u) + 1`` bits).
* Signed exponents as one sign bit plus gamma of ``|q| + 1`` (exponents of
  fractional values are negative).
* ``write_approx`` / ``read_approx``: a b-bit floor or ceil approximation
  of a positive dyadic, encoded as its leading-bit exponent followed by
  exactly b mantissa bits.  The reader reconstructs the approximated value
  bit-exactly.
* ``write_uint_approx`` / ``read_uint_approx``: the same for nonnegative
  integer counts, with one extra flag bit so zero is encodable.

Dump format (``ADV1``): header line ``ADV1 <nbits>`` then the payload as
hex, bits packed MSB-first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dyadic import FLOOR, Dyadic, ceil_approx, floor_approx, msb_exponent

__all__ = [
    "AdviceTape",
    "BitBudgetReport",
    "TapeError",
    "TapeUnderflowError",
    "DecodeError",
]


class TapeError(Exception):
    pass


class TapeUnderflowError(TapeError):
    """Read past the write cursor: the oracle/strategy pairing is broken."""


class DecodeError(TapeError):
    """Structurally malformed code on the tape."""


class AdviceTape:
    """Append-only bit sequence with a single read cursor."""

    def __init__(self):
        self._bits: list[int] = []
        self._read_cursor = 0
        self._breakdown: list[tuple[str, int]] = []

    # -- accounting ---------------------------------------------------------

    @property
    def bits_written(self) -> int:
        return len(self._bits)

    @property
    def bits_read(self) -> int:
        return self._read_cursor

    @property
    def remaining(self) -> int:
        return len(self._bits) - self._read_cursor

    @property
    def breakdown(self) -> list[tuple[str, int]]:
        return list(self._breakdown)

    def _account(self, label: str | None, nbits: int) -> None:
        if label is not None:
            self._breakdown.append((label, nbits))

    # -- raw bits -----------------------------------------------------------

    def write_bits(self, bits, label: str | None = None) -> None:
        bits = list(bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        self._bits.extend(bits)
        self._account(label, len(bits))

    def read_bits(self, n: int) -> list[int]:
        if n < 0:
            raise ValueError("cannot read a negative number of bits")
        if self._read_cursor + n > len(self._bits):
            raise TapeUnderflowError(
                f"read of {n} bits at {self._read_cursor} exceeds "
                f"{len(self._bits)} written"
            )
        out = self._bits[self._read_cursor:self._read_cursor + n]
        self._read_cursor += n
        return out

    def rewind(self) -> None:
        self._read_cursor = 0

    # -- Elias gamma ---------------------------------------------------------

    def write_self_delim_uint(self, u: int, label: str | None = None) -> None:
        if u < 1:
            raise ValueError("gamma code requires u >= 1")
        payload = [int(c) for c in bin(u)[2:]]
        self.write_bits([0] * (len(payload) - 1) + payload, label)

    def read_self_delim_uint(self) -> int:
        zeros = 0
        try:
            while True:
                bit = self.read_bits(1)[0]
                if bit:
                    break
                zeros += 1
            tail = self.read_bits(zeros)
        except TapeUnderflowError as exc:
            raise DecodeError(f"truncated gamma code: {exc}") from exc
        value = 1
        for bit in tail:
            value = (value << 1) | bit
        return value

    # -- signed exponent ------------------------------------------------------

    def write_signed_exp(self, q: int, label: str | None = None) -> None:
        self.write_bits([1 if q < 0 else 0], label)
        self.write_self_delim_uint(abs(q) + 1, label)

    def read_signed_exp(self) -> int:
        sign = self.read_bits(1)[0]
        mag = self.read_self_delim_uint() - 1
        return -mag if sign else mag

    # -- b-bit approximations --------------------------------------------------

    def write_approx(self, v: Dyadic, b: int, mode: str = FLOOR,
                     label: str | None = None) -> Dyadic:
        """Write the b-bit approximation of v > 0; returns the value written."""
        if v.m <= 0:
            raise ValueError("write_approx requires a positive value")
        w = floor_approx(v, b) if mode == FLOOR else ceil_approx(v, b)
        q = msb_exponent(w)
        # w always fits in b bits below its own leading bit (a ceil carry
        # collapses the mantissa to a single bit)
        mant = w.m << (w.e - (q - b + 1))
        assert mant.bit_length() <= b
        self.write_signed_exp(q, label)
        self.write_bits([(mant >> (b - 1 - i)) & 1 for i in range(b)], label)
        return w

    def read_approx(self, b: int) -> Dyadic:
        q = self.read_signed_exp()
        bits = self.read_bits(b)
        mant = 0
        for bit in bits:
            mant = (mant << 1) | bit
        if mant >> (b - 1) != 1:
            raise DecodeError("approximation mantissa lost its leading bit")
        return Dyadic(mant, q - b + 1)

    def write_uint_approx(self, u: int, b: int, label: str | None = None) -> int:
        """Write floor_approx of a count u >= 0 (flag bit makes zero encodable)."""
        if u < 0:
            raise ValueError("count must be nonnegative")
        if u == 0:
            self.write_bits([0], label)
            return 0
        self.write_bits([1], label)
        return self.write_approx(Dyadic(u), b, FLOOR, label).floor_int()

    def read_uint_approx(self, b: int) -> int:
        if not self.read_bits(1)[0]:
            return 0
        value = self.read_approx(b)
        if not value.is_integer():
            raise DecodeError("expected an integer-valued field")
        return value.floor_int()

    # -- ADV1 dump format --------------------------------------------------------

    def dump(self) -> str:
        nbits = len(self._bits)
        packed = bytearray((nbits + 7) // 8)
        for i, bit in enumerate(self._bits):
            if bit:
                packed[i // 8] |= 0x80 >> (i % 8)
        return f"ADV1 {nbits}\n{packed.hex()}\n"

    @classmethod
    def load(cls, text: str) -> "AdviceTape":
        lines = text.strip().splitlines()
        if not lines or not lines[0].startswith("ADV1"):
            raise DecodeError("missing ADV1 header")
        try:
            nbits = int(lines[0].split()[1])
            payload = bytes.fromhex(lines[1].strip()) if len(lines) > 1 else b""
        except (IndexError, ValueError) as exc:
            raise DecodeError(f"bad ADV1 dump: {exc}") from exc
        if nbits > len(payload) * 8:
            raise DecodeError("ADV1 payload shorter than declared bit length")
        tape = cls()
        tape._bits = [(payload[i // 8] >> (7 - i % 8)) & 1 for i in range(nbits)]
        return tape


@dataclass(frozen=True)
class BitBudgetReport:
    """Total bits written and the per-field split (sums to the total)."""

    bits_written: int
    breakdown: tuple[tuple[str, int], ...]

    @classmethod
    def from_tape(cls, tape: AdviceTape) -> "BitBudgetReport":
        merged: dict[str, int] = {}
        order: list[str] = []
        for label, count in tape.breakdown:
            if label not in merged:
                merged[label] = 0
                order.append(label)
            merged[label] += count
        return cls(tape.bits_written, tuple((k, merged[k]) for k in order))

    def field_bits(self, label: str) -> int:
        return sum(c for k, c in self.breakdown if k == label)
