"""Exact dyadic rationals and b-bit truncation of enclosed real samples.

A dyadic rational is numerator / 2**exponent with a nonnegative exponent.
All arithmetic and comparisons are exact; nothing here ever rounds except
`truncate_to_bits`, whose rounding (toward zero) is the point.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import GuardInsufficient

__all__ = ["DyadicRational", "RealSample", "truncate_to_bits"]


@dataclass(frozen=True)
class DyadicRational:
    """Exact value numerator / 2**exponent, kept in canonical form.

    Canonical form: the numerator is odd or zero, or the exponent is zero.
    Normalization happens at construction and is deterministic.
    """

    numerator: int
    exponent: int = 0

    def __post_init__(self):
        num, exp = self.numerator, self.exponent
        if exp < 0:
            raise ValueError("exponent must be nonnegative")
        if num == 0:
            exp = 0
        else:
            while exp > 0 and num % 2 == 0:
                num //= 2
                exp -= 1
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "exponent", exp)

    # -- constructors ----------------------------------------------------
    @classmethod
    def zero(cls) -> "DyadicRational":
        return cls(0, 0)

    @classmethod
    def from_int(cls, k: int) -> "DyadicRational":
        return cls(k, 0)

    @classmethod
    def power_of_two(cls, k: int) -> "DyadicRational":
        """2**k for any integer k (negative k allowed)."""
        if k >= 0:
            return cls(1 << k, 0)
        return cls(1, -k)

    @classmethod
    def from_fraction(cls, f: Fraction) -> "DyadicRational":
        den = f.denominator
        if den & (den - 1) != 0:
            raise ValueError(f"{f} is not dyadic")
        return cls(f.numerator, den.bit_length() - 1)

    # -- views ------------------------------------------------------------
    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, 1 << self.exponent)

    def numerator_at(self, b: int) -> int:
        """Numerator when written over denominator 2**b (requires exponent <= b)."""
        if self.exponent > b:
            raise ValueError(f"value needs {self.exponent} fractional bits, only {b} allowed")
        return self.numerator << (b - self.exponent)

    def is_power_of_two(self) -> bool:
        n = self.numerator
        return n > 0 and n & (n - 1) == 0

    def log2(self) -> int:
        """Exact base-2 logarithm; only valid for powers of two."""
        if not self.is_power_of_two():
            raise ValueError(f"{self} is not a power of two")
        return self.numerator.bit_length() - 1 - self.exponent

    # -- ring operations (exact) ------------------------------------------
    def __add__(self, other: "DyadicRational") -> "DyadicRational":
        e = max(self.exponent, other.exponent)
        return DyadicRational(
            (self.numerator << (e - self.exponent)) + (other.numerator << (e - other.exponent)), e
        )

    def __sub__(self, other: "DyadicRational") -> "DyadicRational":
        return self + (-other)

    def __neg__(self) -> "DyadicRational":
        return DyadicRational(-self.numerator, self.exponent)

    def __abs__(self) -> "DyadicRational":
        return DyadicRational(abs(self.numerator), self.exponent)

    def __mul__(self, other):
        if isinstance(other, int):
            return DyadicRational(self.numerator * other, self.exponent)
        return DyadicRational(self.numerator * other.numerator, self.exponent + other.exponent)

    __rmul__ = __mul__

    def scaled_pow2(self, k: int) -> "DyadicRational":
        """Exact multiplication by 2**k."""
        if k >= 0:
            return DyadicRational(self.numerator << k, self.exponent)
        return DyadicRational(self.numerator, self.exponent - k)

    # -- exact comparisons --------------------------------------------------
    def _cmp_key(self, other) -> tuple[int, int]:
        if isinstance(other, int):
            other = DyadicRational(other, 0)
        elif isinstance(other, Fraction):
            a = self.numerator * other.denominator
            b = other.numerator << self.exponent
            return a, b
        e = max(self.exponent, other.exponent)
        return (
            self.numerator << (e - self.exponent),
            other.numerator << (e - other.exponent),
        )

    def __lt__(self, other):
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other):
        a, b = self._cmp_key(other)
        return a <= b

    def __gt__(self, other):
        a, b = self._cmp_key(other)
        return a > b

    def __ge__(self, other):
        a, b = self._cmp_key(other)
        return a >= b

    def __str__(self) -> str:
        if self.exponent == 0:
            return str(self.numerator)
        return f"{self.numerator}/2^{self.exponent}"

    def encode(self) -> str:
        """Always-explicit form used in certificate files."""
        return f"{self.numerator}/2^{self.exponent}"

    @classmethod
    def decode(cls, text: str) -> "DyadicRational":
        if "/" in text:
            num, den = text.split("/", 1)
            if not den.startswith("2^"):
                raise ValueError(f"bad dyadic literal {text!r}")
            return cls(int(num), int(den[2:]))
        return cls(int(text), 0)


@dataclass(frozen=True)
class RealSample:
    """Two-sided enclosure of a real number x: |x - mantissa/2**prec| < 2**-prec.

    When `exact` is set the value is x itself and `prec` only records the
    scale of the mantissa.
    """

    mantissa: int
    prec: int
    exact: bool = False

    def value(self) -> Fraction:
        return Fraction(self.mantissa, 1 << self.prec) if self.prec >= 0 else Fraction(
            self.mantissa * (1 << -self.prec)
        )

    @classmethod
    def exact_value(cls, f: Fraction | int) -> "RealSample":
        f = Fraction(f)
        den = f.denominator
        if den & (den - 1) != 0:
            raise ValueError("exact samples must be dyadic")
        return cls(f.numerator, den.bit_length() - 1, exact=True)


GUARD_BITS = 64


def _trunc_toward_zero(num: int, shift: int) -> int:
    """floor(|num| / 2**shift) with the sign of num (truncation toward zero)."""
    if num >= 0:
        return num >> shift
    return -((-num) >> shift)


def truncate_to_bits(x: RealSample, b: int) -> DyadicRational:
    """Keep the b most significant fractional bits of x, rounding toward zero.

    Returns sign(x) * floor(|x| * 2**b) / 2**b. The enclosure must carry at
    least b + 64 guard bits; if the enclosure straddles a multiple of 2**-b
    the truncation is ambiguous and GuardInsufficient is raised so the caller
    can resample at higher precision.
    """
    if b < 0:
        raise ValueError("b must be nonnegative")
    if x.exact:
        if x.prec <= b:
            return DyadicRational(x.mantissa << (b - x.prec), b)
        return DyadicRational(_trunc_toward_zero(x.mantissa, x.prec - b), b)
    if x.prec < b + GUARD_BITS:
        raise ValueError(f"sample carries {x.prec - b} guard bits, need >= {GUARD_BITS}")
    shift = x.prec - b
    lo, hi = x.mantissa - 1, x.mantissa + 1
    t_lo = _trunc_toward_zero(lo, shift)
    t_hi = _trunc_toward_zero(hi, shift)
    if t_lo != t_hi:
        raise GuardInsufficient(f"truncation to {b} bits is ambiguous at this precision")
    return DyadicRational(t_lo, b)
