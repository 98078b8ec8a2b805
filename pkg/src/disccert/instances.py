"""Problem instances and their canonical on-disk encoding.

Two instance kinds exist: fixed-point matrices (m x n grids of b-bit dyadic
rationals, stored as integer numerators over 2**b) and partition instances
(n nonnegative b-bit integers). The text encoding is injective and
deterministic; its SHA-256 digest binds certificates to instances.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

from .dyadic import DyadicRational
from .errors import FormatError

__all__ = [
    "FixedPointMatrix",
    "PartitionInstance",
    "canonical_serialize",
    "parse_instance",
    "instance_digest",
]


@dataclass(frozen=True)
class FixedPointMatrix:
    """m x n matrix with entries numerators[i][j] / 2**b.

    `int_bound` records the smallest g >= 0 with |numerator| < 2**(b+g)
    for every entry, i.e. every entry value has magnitude below 2**g.
    """

    m: int
    n: int
    b: int
    numerators: tuple[tuple[int, ...], ...]
    int_bound: int = -1  # computed at construction

    def __post_init__(self):
        if self.m <= 0 or self.n <= 0:
            raise ValueError("dimensions must be positive")
        if self.b < 0:
            raise ValueError("b must be nonnegative")
        if len(self.numerators) != self.m or any(len(r) != self.n for r in self.numerators):
            raise ValueError("numerator grid does not match dimensions")
        biggest = max((abs(v) for row in self.numerators for v in row), default=0)
        g = max(0, biggest.bit_length() - self.b) if biggest else 0
        while biggest >= 1 << (self.b + g):
            g += 1
        object.__setattr__(self, "int_bound", g)

    @classmethod
    def from_rows(cls, b: int, rows: list[list[int]]) -> "FixedPointMatrix":
        return cls(len(rows), len(rows[0]), b, tuple(tuple(r) for r in rows))

    @classmethod
    def from_entries(cls, b: int, entries: list[list[DyadicRational]]) -> "FixedPointMatrix":
        rows = [[e.numerator_at(b) for e in row] for row in entries]
        return cls.from_rows(b, rows)

    def entry(self, i: int, j: int) -> DyadicRational:
        return DyadicRational(self.numerators[i][j], self.b)

    def entry_fraction(self, i: int, j: int) -> Fraction:
        return Fraction(self.numerators[i][j], 1 << self.b)

    def row_fractions(self, i: int) -> list[Fraction]:
        d = 1 << self.b
        return [Fraction(v, d) for v in self.numerators[i]]

    def max_abs_numerator(self) -> int:
        return max(abs(v) for row in self.numerators for v in row)


@dataclass(frozen=True)
class PartitionInstance:
    """n nonnegative integers, each below 2**b."""

    n: int
    b: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.n <= 0 or self.b <= 0:
            raise ValueError("n and b must be positive")
        if len(self.values) != self.n:
            raise ValueError("value count does not match n")
        top = 1 << self.b
        for v in self.values:
            if not 0 <= v < top:
                raise ValueError(f"value {v} outside [0, 2^{self.b})")

    def to_matrix(self) -> FixedPointMatrix:
        """The 1 x n fixed-point matrix with entries values[i] / 2**b."""
        return FixedPointMatrix(1, self.n, self.b, (tuple(self.values),))


_DISC_HEADER = "disc-instance v1"
_PART_HEADER = "partition-instance v1"


def canonical_serialize(instance) -> bytes:
    """Deterministic, injective text encoding of an instance.

    Matrix:     header line, "m n b", then m lines of n signed numerators.
    Partition:  header line, "n b", then one line of n integers.
    """
    if isinstance(instance, FixedPointMatrix):
        lines = [_DISC_HEADER, f"{instance.m} {instance.n} {instance.b}"]
        lines += [" ".join(str(v) for v in row) for row in instance.numerators]
    elif isinstance(instance, PartitionInstance):
        lines = [_PART_HEADER, f"{instance.n} {instance.b}"]
        lines.append(" ".join(str(v) for v in instance.values))
    else:
        raise TypeError(f"cannot serialize {type(instance).__name__}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def parse_instance(data: bytes) -> FixedPointMatrix | PartitionInstance:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise FormatError(f"not UTF-8: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty instance file")
    header = lines[0]
    try:
        if header == _DISC_HEADER:
            m, n, b = (int(t) for t in lines[1].split())
            if len(lines) < 2 + m:
                raise FormatError("truncated matrix body")
            rows = []
            for i in range(m):
                row = [int(t) for t in lines[2 + i].split()]
                if len(row) != n:
                    raise FormatError(f"row {i} has {len(row)} entries, expected {n}")
                rows.append(row)
            if len(lines) > 2 + m and any(s.strip() for s in lines[2 + m :]):
                raise FormatError("trailing content after matrix body")
            return FixedPointMatrix(m, n, b, tuple(tuple(r) for r in rows))
        if header == _PART_HEADER:
            n, b = (int(t) for t in lines[1].split())
            if len(lines) < 3:
                raise FormatError("missing partition values")
            vals = [int(t) for t in lines[2].split()]
            if len(vals) != n:
                raise FormatError(f"found {len(vals)} values, expected {n}")
            if len(lines) > 3 and any(s.strip() for s in lines[3:]):
                raise FormatError("trailing content after values")
            return PartitionInstance(n, b, tuple(vals))
    except FormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise FormatError(f"malformed instance file: {exc}") from None
    raise FormatError(f"unknown header {header!r}")


def instance_digest(data: bytes) -> str:
    """SHA-256 hex digest of the canonical encoding."""
    return hashlib.sha256(data).hexdigest()
