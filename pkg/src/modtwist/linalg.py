"""Small dense matrices over a cyclotomic field.

Matrices are tuples of row tuples of ``CycloElem``; everything is exact, and
sizes never exceed 3x3 in practice, so plain Gauss-Jordan is the right tool.
"""

from __future__ import annotations

from typing import Sequence

from .cyclotomic import CycloElem, CycloField
from .errors import SingularMatrix

Matrix = tuple[tuple[CycloElem, ...], ...]


def matrix(F: CycloField, rows: Sequence[Sequence]) -> Matrix:
    return tuple(tuple(F(x) for x in row) for row in rows)


def identity(F: CycloField, n: int) -> Matrix:
    return tuple(tuple(F.one if i == j else F.zero for j in range(n)) for i in range(n))


def mat_mul(A: Matrix, B: Matrix) -> Matrix:
    cols = list(zip(*B))
    out = []
    for row in A:
        new = []
        for col in cols:
            acc = None
            for a, b in zip(row, col):
                if a and b:
                    t = a * b
                    acc = t if acc is None else acc + t
            new.append(acc if acc is not None else row[0].field.zero)
        out.append(tuple(new))
    return tuple(out)


def mat_vec(A: Matrix, v: Sequence[CycloElem]) -> tuple[CycloElem, ...]:
    out = []
    for row in A:
        acc = row[0].field.zero
        for a, x in zip(row, v):
            if a and x:
                acc = acc + a * x
        out.append(acc)
    return tuple(out)


def transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def mat_galois(A: Matrix, d: int) -> Matrix:
    return tuple(tuple(x.galois(d) for x in row) for row in A)


def mat_scale(A: Matrix, c) -> Matrix:
    return tuple(tuple(x * c for x in row) for row in A)


def mat_det(A: Matrix):
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    if n == 3:
        (a, b, c), (d, e, f), (g, h, i) = A
        return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    rows = [list(r) for r in A]
    F = A[0][0].field
    det = F.one
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            return F.zero
        if piv != col:
            rows[col], rows[piv] = rows[piv], rows[col]
            det = -det
        p = rows[col][col]
        det = det * p
        inv = p.inverse()
        for r in range(col + 1, n):
            if rows[r][col]:
                c = rows[r][col] * inv
                rows[r] = [x - c * y for x, y in zip(rows[r], rows[col])]
    return det


def mat_inv(A: Matrix) -> Matrix:
    n = len(A)
    F = A[0][0].field
    if n == 2:
        det = mat_det(A)
        if not det:
            raise SingularMatrix("matrix is not invertible")
        inv = det.inverse()
        (a, b), (c, d) = A
        return ((d * inv, -b * inv), (-c * inv, a * inv))
    rows = [list(r) + [F.one if i == j else F.zero for j in range(n)] for i, r in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if rows[r][col]), None)
        if piv is None:
            raise SingularMatrix("matrix is not invertible")
        rows[col], rows[piv] = rows[piv], rows[col]
        inv = rows[col][col].inverse()
        rows[col] = [x * inv for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col]:
                c = rows[r][col]
                rows[r] = [x - c * y for x, y in zip(rows[r], rows[col])]
    return tuple(tuple(r[n:]) for r in rows)


def rank(vectors: Sequence[Sequence[CycloElem]]) -> int:
    """Rank over K_N of a list of vectors."""
    rows = [list(v) for v in vectors]
    if not rows:
        return 0
    r = 0
    ncols = len(rows[0])
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = rows[r][col].inverse()
        for i in range(r + 1, len(rows)):
            if rows[i][col]:
                c = rows[i][col] * inv
                rows[i] = [x - c * y for x, y in zip(rows[i], rows[r])]
        r += 1
    return r


def is_scalar_multiple(A: Matrix, B: Matrix):
    """Return c with A = c*B, or None."""
    flatA = [x for row in A for x in row]
    flatB = [x for row in B for x in row]
    k = next((i for i, b in enumerate(flatB) if b), None)
    if k is None:
        return None
    c = flatA[k] / flatB[k]
    if all(a == c * b for a, b in zip(flatA, flatB)):
        return c
    return None
