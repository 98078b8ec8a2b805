"""Ground-truth brute-force computations.

Everything here is exact and exhaustive (or plain Monte Carlo for the
anti-concentration check); the certifier is tested against these at small
sizes. The sign enumerations walk a Gray code so each of the 2^(n-1) sign
classes costs O(m) integer updates, which keeps n = 24 feasible.
"""
from __future__ import annotations

from fractions import Fraction

from .dyadic import DyadicRational
from .errors import DimensionTooLarge
from .gen import truncated_gaussian, truncated_uniform
from .instances import FixedPointMatrix, PartitionInstance

__all__ = ["brute_force_disc", "has_perfect_partition", "empirical_anticoncentration"]


def brute_force_disc(
    A: FixedPointMatrix, n_guard: int = 25
) -> tuple[DyadicRational, tuple[int, ...]]:
    """Exact discrepancy min over signings x of max_i |<A_i, x>|, with an
    optimal signing. x and -x are equivalent, so x_0 = +1 is fixed."""
    if A.n > n_guard:
        raise DimensionTooLarge(f"n = {A.n} exceeds guard {n_guard}")
    m, n = A.m, A.n
    cols = [[A.numerators[i][j] for i in range(m)] for j in range(n)]
    x = [1] * n
    sums = [sum(A.numerators[i]) for i in range(m)]
    best = max(abs(s) for s in sums)
    best_x = tuple(x)
    gray = 0
    for step in range(1, 1 << (n - 1)):
        # flip the bit that changes in the Gray code of `step`
        g = step ^ (step >> 1)
        changed = (gray ^ g).bit_length() - 1
        gray = g
        j = n - 1 - changed  # flip low-order coordinates most often
        x[j] = -x[j]
        cj = cols[j]
        delta = 2 * x[j]
        for i in range(m):
            sums[i] += delta * cj[i]
        val = max(abs(s) for s in sums)
        if val < best:
            best = val
            best_x = tuple(x)
            if best == 0:
                break
    return DyadicRational(best, A.b), best_x


def has_perfect_partition(
    inst: PartitionInstance, n_guard: int = 26
) -> frozenset[int] | None:
    """A subset S with |sum_S - sum_complement| <= 1, or None if none exists.

    Exact integer Gray-code scan over subsets with element 0 fixed out of S
    (complementing S preserves the imbalance)."""
    n = inst.n
    if n > n_guard:
        raise DimensionTooLarge(f"n = {n} exceeds guard {n_guard}")
    a = inst.values
    total = sum(a)
    # d = sum_S - sum_complement with S initially empty
    d = -total
    if abs(d) <= 1:
        return frozenset()
    inside = [False] * n
    gray = 0
    for step in range(1, 1 << (n - 1)):
        g = step ^ (step >> 1)
        changed = (gray ^ g).bit_length() - 1
        gray = g
        j = 1 + changed  # element 0 stays out
        inside[j] = not inside[j]
        d += 2 * a[j] if inside[j] else -2 * a[j]
        if abs(d) <= 1:
            return frozenset(i for i in range(n) if inside[i])
    return None


def empirical_anticoncentration(
    dist: str,
    y: tuple[Fraction, ...],
    theta: Fraction,
    b: int,
    trials: int,
    seed: int,
) -> Fraction:
    """Monte Carlo frequency of |<A_bar, y>| <= theta over fresh b-bit
    truncated draws of a random row (dist in {"gaussian", "uniform01"}).

    The inner products and the comparison are exact."""
    if trials < 1:
        raise ValueError("trials must be positive")
    if max(abs(v) for v in y) < 1:
        raise ValueError("need max |y_i| >= 1")
    if dist not in ("gaussian", "uniform01"):
        raise ValueError(f"unknown distribution {dist!r}")
    n = len(y)
    hits = 0
    for t in range(trials):
        acc = Fraction(0)
        for j in range(n):
            if dist == "gaussian":
                v = truncated_gaussian(("anticonc", seed, t, j), b)
            else:
                v = truncated_uniform(("anticonc", seed, t, j), b)
            if y[j] != 0:
                acc += v.as_fraction() * y[j]
        if abs(acc) <= theta:
            hits += 1
    return Fraction(hits, trials)
