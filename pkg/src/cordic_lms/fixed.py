"""Two's-complement fixed-point numbers with checked arithmetic.

A :class:`FixedPoint` is a signed integer ``raw`` interpreted as
``raw * 2**-frac_bits`` inside a ``word_bits``-wide register. Additions that
leave the register raise :class:`FixedPointOverflowError` instead of wrapping,
and right shifts are arithmetic (they floor towards minus infinity), which is
what a barrel shifter on a two's-complement word does.
"""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_FRAC_BITS = 48
DEFAULT_WORD_BITS = 64


class FixedPointOverflowError(OverflowError):
    """Raised when a value does not fit the fixed-point word."""


def raw_limits(frac_bits: int, word_bits: int) -> tuple[int, int]:
    """Smallest and largest raw integer of a ``word_bits`` register."""
    _check_format(frac_bits, word_bits)
    return -(1 << (word_bits - 1)), (1 << (word_bits - 1)) - 1


def _check_format(frac_bits, word_bits):
    if word_bits < 2:
        raise ValueError(f"word_bits must be >= 2, got {word_bits}")
    if not 0 <= frac_bits < word_bits:
        raise ValueError(f"frac_bits must lie in [0, {word_bits}), got {frac_bits}")


@dataclass(frozen=True)
class FixedPoint:
    raw: int
    frac_bits: int = DEFAULT_FRAC_BITS
    word_bits: int = DEFAULT_WORD_BITS

    def __post_init__(self):
        lo, hi = raw_limits(self.frac_bits, self.word_bits)
        if not lo <= self.raw <= hi:
            raise FixedPointOverflowError(
                f"raw value {self.raw} outside Q{self.word_bits - self.frac_bits}.{self.frac_bits}"
            )

    @classmethod
    def from_float(cls, value: float, frac_bits=DEFAULT_FRAC_BITS, word_bits=DEFAULT_WORD_BITS):
        return to_fixed(value, frac_bits, word_bits)

    def _like(self, raw):
        return FixedPoint(raw, self.frac_bits, self.word_bits)

    def _same_format(self, other):
        if not isinstance(other, FixedPoint):
            return NotImplemented
        if (other.frac_bits, other.word_bits) != (self.frac_bits, self.word_bits):
            raise ValueError("fixed-point format mismatch")
        return other

    def __add__(self, other):
        other = self._same_format(other)
        if other is NotImplemented:
            return other
        return self._like(self.raw + other.raw)

    def __sub__(self, other):
        other = self._same_format(other)
        if other is NotImplemented:
            return other
        return self._like(self.raw - other.raw)

    def __neg__(self):
        return self._like(-self.raw)

    def __rshift__(self, k: int):
        if k < 0:
            raise ValueError("negative shift")
        # Python's >> on int floors, i.e. an arithmetic shift.
        return self._like(self.raw >> k)

    def __abs__(self):
        return self._like(abs(self.raw))

    def __lt__(self, other):
        return self.raw < self._same_format(other).raw

    def __le__(self, other):
        return self.raw <= self._same_format(other).raw

    def __float__(self):
        return from_fixed(self)

    def is_negative(self) -> bool:
        return self.raw < 0

    def __repr__(self):
        return f"FixedPoint({float(self)!r}, raw={self.raw}, Q{self.word_bits - self.frac_bits}.{self.frac_bits})"


def to_fixed(value: float, frac_bits: int = DEFAULT_FRAC_BITS, word_bits: int = DEFAULT_WORD_BITS) -> FixedPoint:
    """Round ``value`` to the nearest representable fixed-point number.

    Ties round to even. Raises :class:`FixedPointOverflowError` when the
    rounded value does not fit, and ``ValueError`` for NaN or infinity.
    """
    _check_format(frac_bits, word_bits)
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        raise ValueError(f"cannot convert {value} to fixed point")
    # Scaling by a power of two is exact, so round() sees the true product.
    return FixedPoint(round(value * (1 << frac_bits)), frac_bits, word_bits)


def from_fixed(fp: FixedPoint) -> float:
    return fp.raw / (1 << fp.frac_bits)
