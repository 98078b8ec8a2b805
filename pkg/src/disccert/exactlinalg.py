"""Small exact-rational linear algebra kernels used by the lattice and
ellipsoid modules: LDL^T factorization, triangular solves, determinants,
rank. Matrices are plain lists of lists of Fraction (or int where noted).
"""
from __future__ import annotations

from fractions import Fraction

from .errors import NotPositiveDefinite

__all__ = [
    "ldlt",
    "solve_ldlt",
    "det_bareiss",
    "rank",
    "solve_square",
    "mat_mul",
    "transpose",
    "identity_int",
]


def ldlt(Q: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact LDL^T of a symmetric matrix: Q = L D L^T, L unit lower triangular.

    Raises NotPositiveDefinite when some pivot is <= 0, which is an exact
    positive-definiteness test for symmetric input.
    """
    n = len(Q)
    L = [[Fraction(0)] * n for _ in range(n)]
    D = [Fraction(0)] * n
    for j in range(n):
        s = Q[j][j]
        for k in range(j):
            s -= L[j][k] * L[j][k] * D[k]
        if s <= 0:
            raise NotPositiveDefinite(f"pivot {j} is {s}")
        D[j] = s
        L[j][j] = Fraction(1)
        for i in range(j + 1, n):
            t = Q[i][j]
            for k in range(j):
                t -= L[i][k] * L[j][k] * D[k]
            L[i][j] = t / s
    return L, D


def solve_ldlt(L: list[list[Fraction]], D: list[Fraction], rhs: list[Fraction]) -> list[Fraction]:
    """Solve (L D L^T) x = rhs exactly."""
    n = len(D)
    y = list(rhs)
    for i in range(n):
        for k in range(i):
            y[i] -= L[i][k] * y[k]
    for i in range(n):
        y[i] /= D[i]
    for i in range(n - 1, -1, -1):
        for k in range(i + 1, n):
            y[i] -= L[k][i] * y[k]
    return y


def det_bareiss(M: list[list[int]]) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    n = len(M)
    a = [row[:] for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rank(rows: list[list[Fraction]]) -> int:
    """Exact rank via fraction Gaussian elimination."""
    if not rows:
        return 0
    a = [list(r) for r in rows]
    m, n = len(a), len(a[0])
    r = 0
    for c in range(n):
        piv = None
        for i in range(r, m):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = a[r][c]
        for i in range(r + 1, m):
            if a[i][c] != 0:
                f = a[i][c] / inv
                for j in range(c, n):
                    a[i][j] -= f * a[r][j]
        r += 1
        if r == m:
            break
    return r


def solve_square(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """Solve A x = b exactly; returns None when A is singular."""
    n = len(A)
    a = [list(A[i]) + [b[i]] for i in range(n)]
    for c in range(n):
        piv = None
        for i in range(c, n):
            if a[i][c] != 0:
                piv = i
                break
        if piv is None:
            return None
        a[c], a[piv] = a[piv], a[c]
        inv = a[c][c]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c] / inv
                for j in range(c, n + 1):
                    a[i][j] -= f * a[c][j]
    return [a[i][n] / a[i][i] for i in range(n)]


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]
    return out


def transpose(A):
    return [list(col) for col in zip(*A)]


def identity_int(n: int) -> list[list[int]]:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]
