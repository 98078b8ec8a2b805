"""Exact lattice reduction and shortest-vector machinery on Gram matrices.

Lattices appear here only through their Gram matrix Q (an exact rational
positive-definite quadratic form); min_{x in Z^n \\ 0} x^T Q x is the squared
first minimum. Working with Q instead of an explicit basis keeps every
quantity rational: no square roots ever enter the pipeline.

The reduction itself is the all-integer variant of LLL (de Weger style):
after clearing denominators, the scaled Gram-Schmidt data lambda[i][j] and
the leading-minor determinants d[i] stay integral throughout, which avoids
per-operation gcd normalization and makes the reduction exact by
construction. The Lovasz condition and size reduction are scale invariant,
so clearing denominators does not change the transform produced.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm

from .exactlinalg import det_bareiss, identity_int, ldlt
from .errors import DimensionTooLarge, NotPositiveDefinite

__all__ = [
    "QuadraticForm",
    "ReducedBasisReport",
    "MinNormDecision",
    "lll_reduce_gram",
    "first_minimum_exact",
    "decide_min_norm_exceeds",
    "vectors_not_exceeding",
]

LOVASZ_DEFAULT = Fraction(3, 4)


@dataclass(frozen=True)
class QuadraticForm:
    """Symmetric positive-definite n x n matrix of exact rationals.

    Symmetry and positive definiteness are verified exactly at construction
    (the latter via LDL^T pivots).
    """

    n: int
    entries: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.n <= 0 or len(self.entries) != self.n:
            raise ValueError("bad dimensions")
        for i in range(self.n):
            if len(self.entries[i]) != self.n:
                raise ValueError("bad dimensions")
            for j in range(i):
                if self.entries[i][j] != self.entries[j][i]:
                    raise ValueError(f"not symmetric at ({i},{j})")
        ldlt([list(row) for row in self.entries])  # raises NotPositiveDefinite

    @classmethod
    def from_rows(cls, rows) -> "QuadraticForm":
        return cls(len(rows), tuple(tuple(Fraction(v) for v in row) for row in rows))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        return self.entries[ij[0]][ij[1]]

    def evaluate(self, x: tuple[int, ...]) -> Fraction:
        """x^T Q x for an integer vector x."""
        acc = Fraction(0)
        for i in range(self.n):
            if x[i]:
                row = self.entries[i]
                acc += x[i] * sum(row[j] * x[j] for j in range(self.n) if x[j])
        return acc

    def scaled(self, c: Fraction) -> "QuadraticForm":
        return QuadraticForm(
            self.n, tuple(tuple(c * v for v in row) for row in self.entries)
        )


@dataclass(frozen=True)
class ReducedBasisReport:
    """Result of a Gram-form LLL reduction: R = U^T Q U with U unimodular.

    gso_norms are the squared Gram-Schmidt norms of the reduced basis and
    mu the lower-triangular Gram-Schmidt coefficients; both are exact.
    """

    reduced_form: QuadraticForm
    unimodular: tuple[tuple[int, ...], ...]
    gso_norms: tuple[Fraction, ...]
    mu: tuple[tuple[Fraction, ...], ...]
    lovasz_param: Fraction

    def first_vector(self) -> tuple[int, ...]:
        """Coordinates (in the original basis) of the first reduced vector."""
        return tuple(self.unimodular[i][0] for i in range(len(self.unimodular)))


def _clear_denominators(Q: QuadraticForm) -> tuple[list[list[int]], int]:
    scale = 1
    for row in Q.entries:
        for v in row:
            scale = lcm(scale, v.denominator)
    G = [[int(v * scale) for v in row] for row in Q.entries]
    return G, scale


def _lll_integral(G0: list[list[int]], pn: int, pd: int):
    """All-integer LLL on an integer Gram matrix.

    Returns (basis, lam, d): `basis` rows are the reduced basis vectors in
    original coordinates, lam[i][j] = mu_ij * d[j+1], and d[k] is the
    determinant of the leading k x k Gram minor of the reduced basis.
    Swap order is deterministic (lowest index first).
    """
    n = len(G0)
    basis = identity_int(n)
    d = [0] * (n + 1)
    d[0] = 1
    lam = [[0] * n for _ in range(n)]

    def gram(i: int, j: int) -> int:
        bi, bj = basis[i], basis[j]
        acc = 0
        for t in range(n):
            c = bi[t]
            if c:
                row = G0[t]
                acc += c * sum(row[s] * bj[s] for s in range(n) if bj[s])
        return acc

    def reduce_step(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            bk, bl = basis[k], basis[l]
            for t in range(n):
                bk[t] -= q * bl[t]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap_step(k: int) -> None:
        basis[k], basis[k - 1] = basis[k - 1], basis[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lam_k = lam[k][k - 1]
        new_dk = (d[k - 1] * d[k + 1] + lam_k * lam_k) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lam_k * t) // d[k]
            lam[i][k - 1] = (new_dk * t + lam_k * lam[i][k]) // d[k + 1]
        d[k] = new_dk

    d[1] = gram(0, 0)
    if d[1] <= 0:
        raise NotPositiveDefinite("pivot 0 is not positive")
    kmax = 0
    k = 1
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = gram(k, j)
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    d[k + 1] = u
                    if u <= 0:
                        raise NotPositiveDefinite(f"pivot {k} is not positive")
        reduce_step(k, k - 1)
        if pd * (d[k + 1] * d[k - 1] + lam[k][k - 1] ** 2) < pn * d[k] * d[k]:
            swap_step(k)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                reduce_step(k, l)
            k += 1
    return basis, lam, d


def lll_reduce_gram(Q: QuadraticForm, lovasz_param: Fraction = LOVASZ_DEFAULT) -> ReducedBasisReport:
    """LLL-reduce the lattice whose Gram matrix is Q, entirely in exact arithmetic.

    The report satisfies, exactly: |mu_ij| <= 1/2, the Lovasz condition with
    the given parameter, R = U^T Q U, det U = +-1. With the default parameter
    3/4 the first entry obeys lambda_1^2 <= R[0,0] <= 2^(n-1) * lambda_1^2.
    """
    if not Fraction(1, 4) < lovasz_param < 1:
        raise ValueError("lovasz_param must lie in (1/4, 1)")
    n = Q.n
    G, _scale = _clear_denominators(Q)
    basis, lam, d = _lll_integral(G, lovasz_param.numerator, lovasz_param.denominator)

    # U columns are the reduced basis vectors, so R = U^T Q U.
    U = tuple(tuple(basis[j][i] for j in range(n)) for i in range(n))
    R = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        Qbi = [sum(Q.entries[t][s] * basis[i][s] for s in range(n) if basis[i][s]) for t in range(n)]
        for j in range(i, n):
            val = sum(Qbi[t] * basis[j][t] for t in range(n) if basis[j][t])
            R[i][j] = val
            R[j][i] = val
    reduced = QuadraticForm(n, tuple(tuple(row) for row in R))

    gso = tuple(Fraction(d[i + 1], d[i]) / _scale for i in range(n))
    mu = tuple(
        tuple(Fraction(lam[i][j], d[j + 1]) if j < i else Fraction(int(i == j)) for j in range(n))
        for i in range(n)
    )

    report = ReducedBasisReport(reduced, U, gso, mu, lovasz_param)
    _check_report(Q, report)
    return report


def _check_report(Q: QuadraticForm, rep: ReducedBasisReport) -> None:
    """Defensive exact re-check of the reducedness invariants."""
    n = Q.n
    p = rep.lovasz_param
    for i in range(n):
        for j in range(i):
            if 2 * abs(rep.mu[i][j]) > 1:
                raise AssertionError(f"size reduction violated at ({i},{j})")
    for i in range(1, n):
        if rep.gso_norms[i] < (p - rep.mu[i][i - 1] ** 2) * rep.gso_norms[i - 1]:
            raise AssertionError(f"Lovasz condition violated at {i}")
    if det_bareiss([list(r) for r in rep.unimodular]) not in (1, -1):
        raise AssertionError("transform is not unimodular")


def _enumerate(R: QuadraticForm, mu, dvec, bound: Fraction, collect_all: bool):
    """Depth-first enumeration of all x != 0 with x^T R x <= bound.

    Uses the LDL form x^T R x = sum_i d_i (x_i + sum_{j>i} mu_ji x_j)^2 and
    explores levels n-1..0, zig-zagging outward from the real center of each
    level's interval (nearest candidates first). Returns (value, x) pairs;
    when collect_all is False the bound shrinks to each strictly better value
    found, turning the walk into a shortest-vector search.
    """
    n = R.n
    found: list[tuple[Fraction, tuple[int, ...]]] = []
    x = [0] * n
    partial = [Fraction(0)] * (n + 1)
    current_bound = [Fraction(bound)]

    def descend(level: int):
        if level < 0:
            val = partial[0]
            found.append((val, tuple(x)))
            if not collect_all and val < current_bound[0]:
                current_bound[0] = val
            return
        c = sum(mu[j][level] * x[j] for j in range(level + 1, n))
        dlev = dvec[level]
        # nearest integer to -c (ties go up; both sides get explored anyway)
        t = -c
        start = (2 * t.numerator + t.denominator) // (2 * t.denominator)

        def attempt(cand: int) -> bool:
            term = dlev * (cand + c) ** 2
            if term > current_bound[0] - partial[level + 1]:
                return False
            x[level] = cand
            partial[level] = partial[level + 1] + term
            if level == 0 and not any(x):
                return True  # skip the zero vector, keep scanning
            descend(level - 1)
            return True

        if not attempt(start):
            x[level] = 0
            return
        up = down = True
        step = 1
        while up or down:
            if up:
                up = attempt(start + step)
            if down:
                down = attempt(start - step)
            step += 1
        x[level] = 0

    descend(n - 1)
    return found


def _ldl_of_form(R: QuadraticForm):
    L, D = ldlt([list(row) for row in R.entries])
    # mu[j][i] (j > i) as used by the enumeration: coefficient of b_i* in b_j
    return L, D


def first_minimum_exact(
    Q: QuadraticForm, dim_guard: int = 20
) -> tuple[Fraction, tuple[int, ...]]:
    """Exact squared first minimum of Q and a witness attaining it.

    LLL-preprocesses, then runs exact branch-and-bound enumeration with the
    first reduced vector's norm as initial radius. Among all optimal
    witnesses (sign-normalized so the first nonzero coordinate is positive)
    the lexicographically smallest is returned.
    """
    if Q.n > dim_guard:
        raise DimensionTooLarge(f"n = {Q.n} exceeds guard {dim_guard}")
    rep = lll_reduce_gram(Q)
    R = rep.reduced_form
    L, D = _ldl_of_form(R)
    bound = R.entries[0][0]
    found = _enumerate(R, L, D, bound, collect_all=False)
    best = min(v for v, _ in found)
    witnesses = set()
    for v, xr in found:
        if v == best:
            # map back through U and normalize the sign
            w = [sum(rep.unimodular[i][j] * xr[j] for j in range(Q.n)) for i in range(Q.n)]
            for c in w:
                if c != 0:
                    if c < 0:
                        w = [-t for t in w]
                    break
            witnesses.add(tuple(w))
    witness = min(witnesses)
    assert Q.evaluate(witness) == best
    return best, witness


def vectors_not_exceeding(
    Q: QuadraticForm, bound: Fraction, dim_guard: int = 20
) -> list[tuple[int, ...]]:
    """All nonzero x (up to sign, first nonzero coordinate positive) with
    x^T Q x <= bound. Exact; used as an independent check of gap decisions."""
    if Q.n > dim_guard:
        raise DimensionTooLarge(f"n = {Q.n} exceeds guard {dim_guard}")
    rep = lll_reduce_gram(Q)
    R = rep.reduced_form
    L, D = _ldl_of_form(R)
    found = _enumerate(R, L, D, Fraction(bound), collect_all=True)
    out = set()
    for _, xr in found:
        w = [sum(rep.unimodular[i][j] * xr[j] for j in range(Q.n)) for i in range(Q.n)]
        for c in w:
            if c != 0:
                if c < 0:
                    w = [-t for t in w]
                break
        out.add(tuple(w))
    return sorted(out)


@dataclass(frozen=True)
class MinNormDecision:
    """Outcome of the sound gap test on min x^T Q x versus a threshold.

    kind is one of "proven_exceeds", "short_vector", "inconclusive". For
    "short_vector" the witness is a nonzero integer vector with
    witness^T Q witness <= threshold.
    """

    kind: str
    witness: tuple[int, ...] | None = None
    first_entry: Fraction | None = None
    report: ReducedBasisReport | None = None


def decide_min_norm_exceeds(Q: QuadraticForm, threshold_sq: Fraction) -> MinNormDecision:
    """Soundly decide whether min_{x != 0} x^T Q x exceeds threshold_sq.

    Reduces Q and compares the first reduced entry R11 against the LLL gap:
    R11 > 2^(n-1) * threshold implies the minimum exceeds the threshold
    (a theorem, since R11 <= 2^(n-1) * lambda_1^2); R11 <= threshold
    exhibits an explicit short vector; anything in between is inconclusive.
    """
    if threshold_sq <= 0:
        raise ValueError("threshold must be positive")
    rep = lll_reduce_gram(Q)
    r11 = rep.reduced_form.entries[0][0]
    if r11 > (1 << (Q.n - 1)) * Fraction(threshold_sq):
        return MinNormDecision("proven_exceeds", None, r11, rep)
    if r11 <= Fraction(threshold_sq):
        w = list(rep.first_vector())
        for c in w:
            if c != 0:
                if c < 0:
                    w = [-t for t in w]
                break
        return MinNormDecision("short_vector", tuple(w), r11, rep)
    return MinNormDecision("inconclusive", None, r11, rep)
