"""Deterministic, seedable instance generators.

Randomness comes from a counter-based stream: SHA-256 of (domain tag, seed,
entry index, block counter) yields an unbounded supply of bits per entry, so
generation is order-independent and parallelizable, and an entry's value is
a fixed real number independent of the precision at which it is queried.
Gaussians are produced by inverse-CDF evaluation of that uniform bit stream
in high-precision arithmetic (never Box-Muller), which gives the prefix
property: truncating the same entry at a smaller b always yields a prefix
of its binary expansion.

Truncation correctness is enforced, not assumed: every sample is returned
as a two-sided enclosure and `truncate_to_bits` refuses to truncate when the
enclosure straddles a bit boundary, in which case the generator retries the
same entry with more bits of the same stream.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

from .dyadic import DyadicRational, RealSample, truncate_to_bits
from .errors import GuardInsufficient
from .instances import FixedPointMatrix, PartitionInstance

__all__ = [
    "GenSpec",
    "MODELS",
    "GaussianSource",
    "gen_gaussian_truncated",
    "gen_partition",
    "gen_wishart",
    "truncated_gaussian",
    "truncated_uniform",
]

MODELS = ("gaussian", "uniform01", "wishart_null", "wishart_planted")

# fixed slack beyond the b+64 enclosure claim: covers inverse-CDF derivative
# amplification (safe for |x| <= ~20) and evaluation round-off
_EVAL_PAD = 110


@dataclass(frozen=True)
class GenSpec:
    """Parameters of one generated instance."""

    model: str
    m: int
    n: int
    b: int
    beta: DyadicRational = DyadicRational.zero()
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.b < 1:
            raise ValueError("b must be at least 1")
        if self.model != "uniform01" and not (0 < self.m <= self.n):
            raise ValueError("matrix models need 0 < m <= n")
        if not (DyadicRational.zero() <= self.beta < 1):
            raise ValueError("beta must lie in [0, 1)")


def _blocks(tag: str, nbits: int) -> int:
    """First nbits of the keyed SHA-256 stream, as an integer (MSB first)."""
    out = 0
    have = 0
    counter = 0
    key = tag.encode("utf-8")
    while have < nbits:
        block = hashlib.sha256(key + b"|" + str(counter).encode()).digest()
        out = (out << 256) | int.from_bytes(block, "big")
        have += 256
        counter += 1
    return out >> (have - nbits)


def _key(*parts) -> str:
    return "disccert-v1|" + "|".join(str(p) for p in parts)


def _uniform_bits(tag: str, b: int) -> int:
    return _blocks(tag, b)


def _gaussian_enclosure(tag: str, b: int, extra: int) -> RealSample:
    """Enclosure of the entry's Gaussian value with b + 64 + extra claimed bits."""
    claim = b + 64 + extra
    stream_bits = claim + _EVAL_PAD
    u_num = _uniform_bits(tag, stream_bits)
    with mp.workprec(stream_bits + 40):
        # midpoint of the uniform's enclosing interval
        u = (2 * mpf(u_num) + 1) / (mpf(2) ** (stream_bits + 1))
        x = mp.sqrt(2) * mp.erfinv(2 * u - 1)
        mant = int(mp.nint(x * (mpf(2) ** claim)))
    return RealSample(mant, claim)


def truncated_gaussian(tag_parts: tuple, b: int) -> DyadicRational:
    """b-bit truncation (toward zero) of one standard normal entry."""
    tag = _key(*tag_parts)
    extra = 0
    while True:
        try:
            return truncate_to_bits(_gaussian_enclosure(tag, b, extra), b)
        except GuardInsufficient:
            extra = 64 if extra == 0 else extra * 2


def truncated_uniform(tag_parts: tuple, b: int) -> DyadicRational:
    """b-bit truncation of one Uniform[0,1) entry (its first b stream bits)."""
    return DyadicRational(_uniform_bits(_key(*tag_parts), b), b)


class GaussianSource:
    """Bit-queryable m x n matrix of iid standard normals.

    `entry_truncated(i, j, b)` returns the b most significant fractional
    bits of entry (i, j); querying the same entry at different b values is
    consistent with a single underlying real number.
    """

    def __init__(self, m: int, n: int, seed: int):
        self.m, self.n, self.seed = m, n, seed

    def entry_truncated(self, i: int, j: int, b: int) -> DyadicRational:
        return truncated_gaussian(("gaussian", self.m, self.n, self.seed, i, j), b)

    def matrix(self, b: int) -> FixedPointMatrix:
        rows = [
            [self.entry_truncated(i, j, b).numerator_at(b) for j in range(self.n)]
            for i in range(self.m)
        ]
        return FixedPointMatrix(self.m, self.n, b, tuple(tuple(r) for r in rows))


def gen_gaussian_truncated(spec: GenSpec) -> FixedPointMatrix:
    """m x n matrix of b-bit truncated iid standard normals."""
    if spec.model != "gaussian":
        raise ValueError("spec.model must be 'gaussian'")
    return GaussianSource(spec.m, spec.n, spec.seed).matrix(spec.b)


def gen_partition(spec: GenSpec) -> PartitionInstance:
    """n iid uniform b-bit integers."""
    if spec.model != "uniform01":
        raise ValueError("spec.model must be 'uniform01'")
    vals = tuple(
        _uniform_bits(_key("partition", spec.n, spec.seed, i), spec.b) for i in range(spec.n)
    )
    return PartitionInstance(spec.n, spec.b, vals)


def _wishart_row(spec: GenSpec, i: int, v: tuple[int, ...], theta_is_zero: bool, extra: int):
    """One row of the spiked model as enclosures: g - theta * (<g,v>/n) * v.

    theta = 1 - sqrt(1-beta), so the row covariance is I - (beta/n) v v^T.
    Computed entirely in mpf with enough slack that the claimed enclosure
    width 2^-(b+64+extra) is conservative.
    """
    b, n = spec.b, spec.n
    claim = b + 64 + extra
    work = claim + _EVAL_PAD
    samples = []
    with mp.workprec(work + 60):
        two = mpf(2)
        for j in range(n):
            tag = _key("wishart", spec.m, spec.n, spec.seed, "row", i, j)
            u_num = _uniform_bits(tag, work)
            u = (2 * mpf(u_num) + 1) / (two ** (work + 1))
            samples.append(mp.sqrt(2) * mp.erfinv(2 * u - 1))
        if theta_is_zero:
            row = samples
        else:
            beta = mpf(spec.beta.numerator) / (two ** spec.beta.exponent)
            theta = 1 - mp.sqrt(1 - beta)
            dot = sum(g * vj for g, vj in zip(samples, v))
            coef = theta * dot / n
            row = [g - coef * vj for g, vj in zip(samples, v)]
        out = []
        for val in row:
            mant = int(mp.nint(val * (two ** claim)))
            out.append(RealSample(mant, claim))
    return out


def gen_wishart(spec: GenSpec) -> tuple[FixedPointMatrix, tuple[int, ...] | None]:
    """Null or spiked Wishart-style matrix; spiked draws return the hidden
    sign vector v for experiment bookkeeping.

    Row streams are shared between the null and planted variants (and do not
    depend on beta), so planted output with beta = 0 is byte-identical to the
    null output for the same seed.
    """
    if spec.model not in ("wishart_null", "wishart_planted"):
        raise ValueError("spec.model must be a wishart model")
    planted = spec.model == "wishart_planted"
    theta_zero = (not planted) or spec.beta.numerator == 0
    v = tuple(
        1 if _uniform_bits(_key("wishart", spec.m, spec.n, spec.seed, "spike", j), 1) else -1
        for j in range(spec.n)
    )
    rows = []
    for i in range(spec.m):
        extra = 0
        while True:
            try:
                samples = _wishart_row(spec, i, v, theta_zero, extra)
                rows.append([truncate_to_bits(s, spec.b).numerator_at(spec.b) for s in samples])
                break
            except GuardInsufficient:
                extra = 64 if extra == 0 else extra * 2
    mat = FixedPointMatrix(spec.m, spec.n, spec.b, tuple(tuple(r) for r in rows))
    return mat, (v if planted else None)
