"""Small exact linear algebra over :class:`fractions.Fraction`.

Matrices are lists of rows. Everything here is dense and meant for the
desk-scale systems that show up in surface models (at most a few dozen
components), so plain Gaussian elimination is the right tool.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


class SingularMatrixError(ArithmeticError):
    pass


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> list[Fraction]:
    """Solve ``a x = b`` exactly by Gauss-Jordan elimination with pivoting on nonzeros."""
    n = len(a)
    if n == 0:
        return []
    m = [list(map(Fraction, row)) + [Fraction(b[i])] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError(f"singular matrix at column {col}")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
        pivot_row = m[col]
        inv = 1 / pivot_row[col]
        for r in range(n):
            if r == col:
                continue
            factor = m[r][col]
            if factor:
                row = m[r]
                for c in range(col, n + 1):
                    if pivot_row[c]:
                        row[c] -= factor * inv * pivot_row[c]
    return [m[i][n] / m[i][i] for i in range(n)]


def ldl_pivots(a: Sequence[Sequence[Fraction]]) -> list[Fraction] | None:
    """Diagonal of the LDL^T factorization without pivoting.

    Returns ``None`` when a zero pivot appears before the end, which for a
    symmetric matrix means it is neither positive nor negative definite.
    """
    n = len(a)
    m = [list(map(Fraction, row)) for row in a]
    pivots = []
    for k in range(n):
        p = m[k][k]
        if p == 0:
            return None
        pivots.append(p)
        for i in range(k + 1, n):
            f = m[i][k] / p
            if f:
                for j in range(k + 1, n):
                    m[i][j] -= f * m[k][j]
    return pivots


def is_negative_definite(a: Sequence[Sequence[Fraction]]) -> bool:
    if not a:
        return True
    pivots = ldl_pivots(a)
    return pivots is not None and all(p < 0 for p in pivots)


def inertia(a: Sequence[Sequence[Fraction]]) -> tuple[int, int, int]:
    """(positive, negative, zero) eigenvalue counts of a symmetric matrix.

    Symmetric Gaussian elimination with diagonal pivoting; a zero diagonal with
    a nonzero off-diagonal entry in its row is resolved by the congruence
    ``e_k <- e_k + e_j`` which creates a nonzero diagonal (Sylvester's law
    keeps the inertia fixed).
    """
    m = [list(map(Fraction, row)) for row in a]
    n = len(m)
    pos = neg = zero = 0
    active = list(range(n))
    while active:
        k = next((i for i in active if m[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in active for j in active if i != j and m[i][j] != 0), None)
            if pair is None:
                zero += len(active)
                break
            i, j = pair
            # row/column operation e_i <- e_i + e_j
            for c in range(n):
                m[i][c] += m[j][c]
            for r in range(n):
                m[r][i] += m[r][j]
            continue
        p = m[k][k]
        if p > 0:
            pos += 1
        else:
            neg += 1
        active.remove(k)
        row_k = list(m[k])
        for i in active:
            f = row_k[i] / p
            if f:
                for j in active:
                    m[i][j] -= f * row_k[j]
            m[i][k] = Fraction(0)
            m[k][i] = Fraction(0)
    return pos, neg, zero


def rationalize(x: float, max_denominator: int = 10**12) -> Fraction:
    """Continued-fraction rounding of a float to a bounded-denominator rational."""
    return Fraction(x).limit_denominator(max_denominator)
