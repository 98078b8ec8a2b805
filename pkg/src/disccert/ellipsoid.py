"""Approximate John ellipsoid of a symmetric polytope, with exact certification.

The polytope is P = {x : |<m_i, x>| <= 1 for all rows m_i}. A weight vector
w >= 0 induces the form Q0 = sum_i w_i m_i m_i^T; after rescaling by the
largest leverage c = max_i m_i^T Q0^{-1} m_i, the ellipsoid {x^T Q x <= 1}
with Q = c * Q0 is inscribed in P by construction, and P is contained in
{x^T Q x <= 4n} whenever c * sum(w) <= 4n. Both containment inequalities
are verified with exact rational arithmetic, so no property of the weight
heuristic is ever trusted: any w that passes `certify_sandwich` is good.

The heuristic itself is a multiplicative leverage fixed-point iteration run
in high-precision floating point (mpmath) and snapped to rationals with
denominator 2**128 before certification. The working precision scales with
the magnitude of the rows; a fixed mantissa would lose the box rows behind
catastrophic cancellation once row magnitudes exceed it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

from .errors import SandwichFailure, SingularIntermediate
from .exactlinalg import ldlt, rank, solve_ldlt, solve_square
from .lattice import QuadraticForm

__all__ = [
    "PolytopeRows",
    "EllipsoidWeights",
    "john_weights",
    "certify_sandwich",
    "leverages_exact",
    "polytope_vertices",
]

SNAP_BITS = 128


@dataclass(frozen=True)
class PolytopeRows:
    """Rows m_1..m_r (exact rationals) defining {x : |<m_i, x>| <= 1}.

    The rows must span R^n so the polytope is bounded; builders that append
    the n standard basis rows satisfy this automatically. Zero rows are
    legal (they encode vacuous constraints) and simply never carry weight.
    """

    n: int
    rows: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if self.n <= 0:
            raise ValueError("dimension must be positive")
        for row in self.rows:
            if len(row) != self.n:
                raise ValueError("row length mismatch")
        if rank([list(r) for r in self.rows]) != self.n:
            raise ValueError("rows do not span the full space; polytope unbounded")

    @classmethod
    def from_rows(cls, rows) -> "PolytopeRows":
        rows = tuple(tuple(Fraction(v) for v in row) for row in rows)
        return cls(len(rows[0]), rows)

    @property
    def r(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class EllipsoidWeights:
    """Certified sandwich: Q = scaling_c * sum_i w_i m_i m_i^T with, exactly,
    max_i m_i^T Q^{-1} m_i <= 1 and scaling_c * sum(w) <= 4n."""

    w: tuple[Fraction, ...]
    scaling_c: Fraction
    Q: QuadraticForm


def _weighted_form(rows: PolytopeRows, w: list[Fraction]) -> list[list[Fraction]]:
    n = rows.n
    Q0 = [[Fraction(0)] * n for _ in range(n)]
    for wi, mi in zip(w, rows.rows):
        if wi == 0:
            continue
        for a in range(n):
            va = mi[a]
            if va == 0:
                continue
            wa = wi * va
            row = Q0[a]
            for b in range(a, n):
                if mi[b] != 0:
                    row[b] += wa * mi[b]
    for a in range(n):
        for b in range(a):
            Q0[a][b] = Q0[b][a]
    return Q0


def _mpf_cholesky(A: list[list], n: int):
    """Lower Cholesky factor of an mpf matrix; None when a pivot is not positive."""
    L = [[mpf(0)] * n for _ in range(n)]
    for j in range(n):
        s = A[j][j]
        for k in range(j):
            s -= L[j][k] * L[j][k]
        if s <= 0:
            return None
        piv = mp.sqrt(s)
        L[j][j] = piv
        for i in range(j + 1, n):
            t = A[i][j]
            for k in range(j):
                t -= L[i][k] * L[j][k]
            L[i][j] = t / piv
    return L


def _mpf_leverages(rows_f: list[list], w: list, n: int):
    """Leverages m_i^T Q0^{-1} m_i for Q0 = sum w_i m_i m_i^T, in mpf."""
    Q0 = [[mpf(0)] * n for _ in range(n)]
    for wi, mi in zip(w, rows_f):
        for a in range(n):
            if mi[a]:
                wa = wi * mi[a]
                for b in range(a, n):
                    Q0[a][b] += wa * mi[b]
    for a in range(n):
        for b in range(a):
            Q0[a][b] = Q0[b][a]
    L = _mpf_cholesky(Q0, n)
    if L is None:
        return None
    levs = []
    for mi in rows_f:
        # forward solve L y = m_i; leverage = ||y||^2
        y = [mpf(0)] * n
        for i in range(n):
            t = mi[i]
            for k in range(i):
                t -= L[i][k] * y[k]
            y[i] = t / L[i][i]
        levs.append(sum(v * v for v in y))
    return levs


def john_weights(rows: PolytopeRows, tol: Fraction = Fraction(1, 2), max_iters: int = 96) -> list[Fraction]:
    """Multiplicative fixed-point iteration toward John-position weights.

    Each step multiplies w_i by the leverage of row i under the current
    weighted form and renormalizes to sum(w) = n; a square-root damping step
    is used when the maximum leverage grows twice in a row. Stops early once
    the maximum leverage is at most 1 + tol (comfortably inside the factor-4
    acceptance region of `certify_sandwich`). No accuracy is claimed here:
    the output is only a candidate for exact certification.
    """
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    if max_iters < 1:
        raise ValueError("max_iters must be positive")
    n, r = rows.n, rows.r
    mag = 1
    for row in rows.rows:
        for v in row:
            mag = max(mag, abs(v.numerator) // v.denominator + 1)
    prec = max(256, 2 * mag.bit_length() + 192)
    with mp.workprec(prec):
        rows_f = [[mpf(v.numerator) / mpf(v.denominator) for v in row] for row in rows.rows]
        # exit once max leverage <= 1/(1-tol); default tol=1/2 stops at 2,
        # well inside the factor-4 acceptance region
        target = 1 / (1 - mpf(tol.numerator) / mpf(tol.denominator))
        damped = False
        failed = True
        for _attempt in range(2):
            w = [mpf(n) / r] * r
            prev_c = None
            grew = 0
            failed = False
            for _ in range(max_iters):
                levs = _mpf_leverages(rows_f, w, n)
                if levs is None:
                    failed = True
                    break
                c = max(levs)
                if c <= target:
                    break
                if prev_c is not None and c > prev_c:
                    grew += 1
                    if grew >= 2:
                        damped = True
                else:
                    grew = 0
                prev_c = c
                w = [wi * (mp.sqrt(lv) if damped else lv) for wi, lv in zip(w, levs)]
                total = sum(w)
                w = [wi * n / total for wi in w]
            if not failed:
                break
            damped = True  # restart from uniform with damping
        if failed:
            raise SingularIntermediate("weight iteration produced a singular form twice")
        snapped = [Fraction(int(mp.floor(wi * (1 << SNAP_BITS))), 1 << SNAP_BITS) for wi in w]
    snapped = [max(v, Fraction(0)) for v in snapped]
    if sum(snapped) == 0:
        raise SingularIntermediate("all weights snapped to zero")
    return snapped


def leverages_exact(rows: PolytopeRows, w: list[Fraction]) -> list[Fraction]:
    """Exact leverages m_i^T Q0^{-1} m_i of every row (zero rows get 0)."""
    Q0 = _weighted_form(rows, list(w))
    L, D = ldlt(Q0)
    levs = []
    for mi in rows.rows:
        y = solve_ldlt(L, D, list(mi))
        levs.append(sum(a * b for a, b in zip(mi, y)))
    return levs


def certify_sandwich(rows: PolytopeRows, w: list[Fraction]) -> EllipsoidWeights:
    """Exactly certify the two-sided ellipsoid sandwich for the given weights.

    Forms Q0 = sum w_i m_i m_i^T, computes c = max_i m_i^T Q0^{-1} m_i by
    exact solves, and sets Q = c * Q0, which makes the inscribed containment
    {x^T Q x <= 1} subset of P hold with equality at the argmax row. Accepts
    iff c * sum(w) <= 4n, which by the support argument places P inside
    {x^T Q x <= 4n}. Raises SandwichFailure otherwise.
    """
    if any(v < 0 for v in w):
        raise ValueError("weights must be nonnegative")
    if sum(w) <= 0:
        raise ValueError("weights must not all vanish")
    if len(w) != rows.r:
        raise ValueError("one weight per row required")
    n = rows.n
    levs = leverages_exact(rows, w)
    c = max(levs)
    outer = c * sum(w)
    if outer > 4 * n:
        raise SandwichFailure(outer)
    Q0 = _weighted_form(rows, list(w))
    Q = QuadraticForm(n, tuple(tuple(c * v for v in row) for row in Q0))
    return EllipsoidWeights(tuple(Fraction(v) for v in w), c, Q)


def polytope_vertices(rows: PolytopeRows, dim_guard: int = 5) -> list[tuple[Fraction, ...]]:
    """All vertices of P = {x : |<m_i, x>| <= 1}, by exact basis enumeration.

    Every vertex is the solution of <m_i, x> = s_i over some n linearly
    independent rows and signs s in {-1, +1}; feasibility against the
    remaining constraints is checked exactly. Exponential; guarded.
    """
    from itertools import combinations, product

    n = rows.n
    if n > dim_guard:
        raise ValueError(f"vertex enumeration guarded at n <= {dim_guard}")
    nonzero = [row for row in rows.rows if any(v != 0 for v in row)]
    verts: set[tuple[Fraction, ...]] = set()
    for subset in combinations(range(len(nonzero)), n):
        A = [list(nonzero[i]) for i in subset]
        for signs in product((Fraction(1), Fraction(-1)), repeat=n):
            x = solve_square(A, list(signs))
            if x is None:
                break  # singular subset: no sign pattern will work
            if all(abs(sum(a * b for a, b in zip(row, x))) <= 1 for row in nonzero):
                verts.add(tuple(x))
    return sorted(verts)
