"""Exact linear algebra over the rationals.

Vectors are tuples of Fractions, matrices are lists of row vectors. All
pivoting is lowest-index first so results are reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vector = tuple
Matrix = list

ZERO = Fraction(0)
ONE = Fraction(1)


def vec(values: Iterable) -> Vector:
    return tuple(Fraction(v) for v in values)


def unit(d: int, i: int) -> Vector:
    return tuple(ONE if k == i else ZERO for k in range(d))


def is_zero(v: Sequence[Fraction]) -> bool:
    return all(x == 0 for x in v)


def add(u: Sequence[Fraction], v: Sequence[Fraction]) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def scale(c: Fraction, v: Sequence[Fraction]) -> Vector:
    return tuple(c * a for a in v)


def rref(rows: Iterable[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [tuple(row) for row in m[:r]], pivots


def rank(rows: Iterable[Sequence[Fraction]]) -> int:
    return len(rref(rows)[0])


def in_span(basis: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> bool:
    if is_zero(v):
        return True
    if not basis:
        return False
    return rank(list(basis) + [v]) == rank(basis)


def same_span(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> bool:
    return rref(a)[0] == rref(b)[0] if (a or b) else True


def extend(base: Sequence[Sequence[Fraction]], candidates: Iterable[Sequence[Fraction]]) -> Matrix:
    """Greedily pick candidates (in order) that enlarge span(base)."""
    picked: Matrix = []
    current = list(base)
    r = rank(current) if current else 0
    for v in candidates:
        trial = current + [v]
        rt = rank(trial)
        if rt > r:
            picked.append(tuple(v))
            current, r = trial, rt
    return picked


def solve(rows: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vector | None:
    """Coefficients c with sum_i c_i * rows[i] == v, or None if v is outside the span.

    ``rows`` must be linearly independent.
    """
    k = len(rows)
    n = len(v)
    # augmented system: columns are the rows, solve A^T c = v
    aug = [[Fraction(rows[i][j]) for i in range(k)] + [Fraction(v[j])] for j in range(n)]
    red, piv = rref(aug)
    if k in piv:
        return None
    c = [ZERO] * k
    for row, p in zip(red, piv):
        c[p] = row[k]
    return tuple(c)


def inverse(mat: Sequence[Sequence[Fraction]]) -> Matrix:
    n = len(mat)
    aug = [list(map(Fraction, mat[i])) + list(unit(n, i)) for i in range(n)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(red) < n:
        raise ValueError("matrix is singular")
    return [tuple(row[n:]) for row in red]


def matmul(a: Sequence[Sequence[Fraction]], b: Sequence[Sequence[Fraction]]) -> Matrix:
    bt = list(zip(*b))
    return [tuple(sum((x * y for x, y in zip(row, col)), ZERO) for col in bt) for row in a]


def det(mat: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(map(Fraction, r)) for r in mat]
    n = len(m)
    sign = 1
    out = ONE
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return ZERO
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            sign = -sign
        out *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return out * sign
