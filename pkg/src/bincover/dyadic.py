"""Exact dyadic (binary fixed-point) arithmetic and b-bit approximations.

A dyadic value is ``mantissa * 2**exponent`` with an arbitrary-precision
integer mantissa, normalized so the mantissa is odd (or zero).  All
arithmetic here is exact; there is no rounding anywhere except in the two
explicit approximation operators:

* ``floor_approx(v, b)`` keeps the ``b`` most significant bits of ``v`` and
  zeroes the rest.  It satisfies ``v - floor_approx(v, b) <= 2**(q-b+1)``
  where ``2**q <= v < 2**(q+1)``, hence ``floor_approx(v, b) >= (1-tau)*v``
  for ``tau = 2**(1-b)``.
* ``ceil_approx(v, b)`` keeps the ``b`` most significant bits and replaces
  the remaining (infinite) tail by ones, which sums to an unconditional
  ``+ 2**(q-b+1)`` on top of the floored value.  Note this means
  ``ceil_approx`` is *not* idempotent: each application adds one ulp at the
  current magnitude.

Values parse from text either as exact decimals (``0.6875``; rejected if
the denominator is not a power of two) or as binary literals
(``0b0.1011``, ``0b1101``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

__all__ = [
    "Dyadic",
    "ApproxParams",
    "FLOOR",
    "CEIL",
    "ZERO",
    "ONE",
    "HALF",
    "msb_exponent",
    "floor_approx",
    "ceil_approx",
    "dyadic_sum",
    "parse_dyadic",
]

FLOOR = "floor"
CEIL = "ceil"


class Dyadic:
    """An exact value ``mantissa * 2**exponent`` (mantissa odd or zero)."""

    __slots__ = ("m", "e")

    def __init__(self, mantissa: int, exponent: int = 0):
        if mantissa == 0:
            self.m = 0
            self.e = 0
            return
        # strip trailing zero bits so every value has a unique representation
        tz = (mantissa & -mantissa).bit_length() - 1
        self.m = mantissa >> tz
        self.e = exponent + tz

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "Dyadic":
        return cls(n, 0)

    @classmethod
    def from_fraction(cls, fr: Fraction) -> "Dyadic":
        """Exact conversion; raises ValueError for non-dyadic rationals."""
        den = fr.denominator
        if den & (den - 1):
            raise ValueError(f"{fr} is not a dyadic rational")
        return cls(fr.numerator, -(den.bit_length() - 1))

    # -- conversions -------------------------------------------------------

    def to_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e)
        return Fraction(self.m, 1 << -self.e)

    def floor_int(self) -> int:
        """Largest integer <= value (exact)."""
        if self.e >= 0:
            return self.m << self.e
        return self.m >> -self.e

    def is_integer(self) -> bool:
        return self.e >= 0 or self.m == 0

    def __float__(self) -> float:
        return float(self.to_fraction())

    # -- arithmetic (always exact) ----------------------------------------

    def __add__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        if self.m == 0:
            return other
        if other.m == 0:
            return self
        e = min(self.e, other.e)
        return Dyadic((self.m << (self.e - e)) + (other.m << (other.e - e)), e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.m, self.e)

    def mul_pow2(self, k: int) -> "Dyadic":
        """Exact multiplication by ``2**k``."""
        return Dyadic(self.m, self.e + k)

    # -- comparisons -------------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        d = self - other
        return (d.m > 0) - (d.m < 0)

    def __eq__(self, other) -> bool:
        return isinstance(other, Dyadic) and self.m == other.m and self.e == other.e

    def __lt__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) < 0

    def __le__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) <= 0

    def __gt__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) > 0

    def __ge__(self, other):
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.m, self.e))

    def __bool__(self):
        return self.m != 0

    # -- rendering ---------------------------------------------------------

    def __str__(self) -> str:
        """Exact decimal form (every dyadic has a finite decimal expansion)."""
        m, e = self.m, self.e
        sign = "-" if m < 0 else ""
        m = abs(m)
        if e >= 0:
            return f"{sign}{m << e}"
        digits = m * 5 ** (-e)  # m / 2**-e == m * 5**-e / 10**-e
        text = str(digits).rjust(-e + 1, "0")
        return f"{sign}{text[:e]}.{text[e:]}"

    def __repr__(self) -> str:
        return f"Dyadic({self})"


ZERO = Dyadic(0)
ONE = Dyadic(1)
HALF = Dyadic(1, -1)


@dataclass(frozen=True)
class ApproxParams:
    """Number of kept bits and rounding direction for b-bit approximations."""

    b: int
    mode: str = FLOOR

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be >= 1")
        if self.mode not in (FLOOR, CEIL):
            raise ValueError(f"unknown mode {self.mode!r}")


def msb_exponent(v: Dyadic) -> int:
    """The exponent q of the leading bit: 2**q <= v < 2**(q+1).

    Undefined for v <= 0 (raises ValueError).
    """
    if v.m <= 0:
        raise ValueError("msb_exponent requires a positive value")
    return v.e + v.m.bit_length() - 1


def floor_approx(v: Dyadic, b: int) -> Dyadic:
    """Keep the b most significant bits of v, zeroing the rest."""
    if b < 1:
        raise ValueError("b must be >= 1")
    q = msb_exponent(v)
    cut = q - b + 1
    if v.e >= cut:
        return v
    return Dyadic(v.m >> (cut - v.e), cut)


def ceil_approx(v: Dyadic, b: int) -> Dyadic:
    """Keep the b most significant bits of v, setting all remaining bits.

    The all-ones tail sums to exactly ``2**(q-b+1)``, so this always equals
    ``floor_approx(v, b) + 2**(q-b+1)`` and is strictly greater than any
    finite dyadic v.
    """
    if b < 1:
        raise ValueError("b must be >= 1")
    cut = msb_exponent(v) - b + 1
    return floor_approx(v, b) + Dyadic(1, cut)


def approx(v: Dyadic, params: ApproxParams) -> Dyadic:
    if params.mode == FLOOR:
        return floor_approx(v, params.b)
    return ceil_approx(v, params.b)


def dyadic_sum(values: Iterable[Dyadic]) -> Dyadic:
    """Exact sum of a sequence of dyadics."""
    total = ZERO
    for v in values:
        total = total + v
    return total


def parse_dyadic(text: str) -> Dyadic:
    """Parse ``0bQ.BITS`` binary form or an exact decimal.

    Decimal strings whose value is not a dyadic rational are rejected.
    """
    text = text.strip()
    if not text:
        raise ValueError("empty dyadic literal")
    negative = text.startswith("-")
    if negative or text.startswith("+"):
        text = text[1:]
    if text.startswith("0b"):
        body = text[2:]
        if "." in body:
            int_part, frac_part = body.split(".", 1)
        else:
            int_part, frac_part = body, ""
        digits = int_part + frac_part
        if not digits or set(digits) - {"0", "1"}:
            raise ValueError(f"bad binary literal {text!r}")
        value = Dyadic(int(digits, 2) if digits else 0, -len(frac_part))
    else:
        try:
            fr = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad dyadic literal {text!r}") from exc
        value = Dyadic.from_fraction(fr)
    return -value if negative else value
