"""Classical q-expansions: eta quotients and the j-invariant.

Series are ``LaurentSeries`` in q^(1/w).  Everything has rational coefficients
and is exact up to the stated precision.
"""

from __future__ import annotations

from fractions import Fraction

from .cyclotomic import CycloField
from .ratfunc import LaurentSeries

__all__ = ["eta_quotient", "j_series", "eisenstein_e4", "J_LEADING"]

# q^-1 + 744 + 196884 q + 21493760 q^2 + 864299970 q^3 + ...
J_LEADING = (1, 744, 196884, 21493760, 864299970, 20245856256)


def _sigma3(n: int) -> int:
    return sum(d**3 for d in range(1, n + 1) if n % d == 0)


def _euler_product(F: CycloField, step: int, length: int) -> list:
    """Coefficients of prod_k (1 - x^(step k)) up to x^(length-1)."""
    c = [0] * length
    c[0] = 1
    k = 1
    while step * k < length:
        e = step * k
        for i in range(length - 1, e - 1, -1):
            c[i] -= c[i - e]
        k += 1
    return c


def eta_quotient(factors: dict[int, int], width: int = 1, precision: int = 10,
                 scale=1, field: CycloField | None = None) -> LaurentSeries:
    """scale * prod_m eta(m tau / width)^r_m as a series in q^(1/width).

    ``precision`` is the exclusive bound on exponents in units of 1/width.
    """
    F = field or CycloField(1)
    lead24 = sum(m * r for m, r in factors.items())
    if lead24 % 24:
        raise ValueError("leading exponent of the eta quotient is not integral")
    v = lead24 // 24
    length = precision - v
    if length <= 0:
        return LaurentSeries(F, width, precision, [], precision)
    acc = [0] * length
    acc[0] = 1
    for m, r in factors.items():
        base = _euler_product(F, m, length)
        if r < 0:
            base = _series_inverse(base)
            r = -r
        for _ in range(r):
            acc = _mul_trunc(acc, base, length)
    return LaurentSeries(F, width, v, [F(Fraction(scale) * x) for x in acc], precision)


def _mul_trunc(a: list, b: list, n: int) -> list:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                if y:
                    out[i + j] += x * y
    return out


def _series_inverse(a: list) -> list:
    # a[0] == 1 for Euler products
    n = len(a)
    b = [0] * n
    b[0] = 1
    for k in range(1, n):
        b[k] = -sum(a[i] * b[k - i] for i in range(1, k + 1))
    return b


def eisenstein_e4(precision: int, field: CycloField | None = None) -> LaurentSeries:
    F = field or CycloField(1)
    cs = [1] + [240 * _sigma3(n) for n in range(1, precision)]
    return LaurentSeries(F, 1, 0, [F(c) for c in cs], precision)


def j_series(precision: int = 4, field: CycloField | None = None) -> LaurentSeries:
    """j = E4^3 / eta^24, known for exponents < precision."""
    F = field or CycloField(1)
    e4 = eisenstein_e4(precision + 1, F)
    delta = eta_quotient({1: 24}, 1, precision + 2, field=F)
    return (e4 ** 3 / delta).truncate(precision)
