"""Exact arithmetic in cyclotomic fields Q(zeta_N) and their subfields.

Elements are stored in the power basis 1, z, ..., z^(phi(N)-1) of z = zeta_N
as an integer numerator vector over one positive common denominator, reduced
modulo the N-th cyclotomic polynomial.  Subfields are never named; they are
always handled through the subgroup H of (Z/NZ)^* that fixes them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import flint

from .errors import DivisionByZero, NotADivisor, NotASubfield, NotAUnit

__all__ = [
    "CycloField",
    "CycloElem",
    "GaloisAut",
    "SubfieldSpec",
    "cyclotomic_polynomial",
    "euler_phi",
    "unit_group_structure",
    "enumerate_subgroups",
    "fixed_field_basis",
    "is_in_subfield",
    "relative_norm",
    "embed",
    "descend",
    "apply_aut",
    "abelian_basis",
    "units_mod",
    "multiplicative_order",
    "factorize",
]


# dense products at or above this degree go through FLINT polynomial arithmetic
FLINT_MUL_DEGREE = 8


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorization; inputs here are small conductors."""
    n = abs(n)
    out: dict[int, int] = {}
    p = 2
    while p * p <= n:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n):
        result -= result // p
    return result


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def units_mod(n: int) -> list[int]:
    if n <= 2:
        return [1]
    return [d for d in range(1, n) if math.gcd(d, n) == 1]


def multiplicative_order(d: int, n: int) -> int:
    if n <= 2:
        return 1
    d %= n
    k, x = 1, d
    while x != 1:
        x = x * d % n
        k += 1
    return k


def _poly_exact_div(a: list[int], b: list[int]) -> list[int]:
    """Quotient of integer polynomials (ascending) when b is monic and divides a."""
    a = list(a)
    db = len(b) - 1
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            q[i - db] = c
            for j, bj in enumerate(b):
                a[i - db + j] -= c * bj
    assert not any(a), "inexact polynomial division"
    return q


@lru_cache(maxsize=None)
def _cyclo_poly(n: int) -> tuple[int, ...]:
    num = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n)[:-1]:
        num = _poly_exact_div(num, list(_cyclo_poly(d)))
    return tuple(num)


def cyclotomic_polynomial(n: int) -> list[int]:
    """Coefficients of Phi_n in ascending degree."""
    if n < 1:
        raise ValueError("conductor must be positive")
    return list(_cyclo_poly(n))


class CycloField:
    """The cyclotomic field K_N.  Instances are interned per conductor."""

    _instances: dict[int, "CycloField"] = {}

    def __new__(cls, N: int):
        N = int(N)
        if N == 2:
            N = 1
        inst = cls._instances.get(N)
        if inst is None:
            if N < 1:
                raise ValueError("conductor must be positive")
            inst = super().__new__(cls)
            inst._setup(N)
            cls._instances[N] = inst
        return inst

    def __reduce__(self):
        return (CycloField, (self.N,))

    def _setup(self, N: int) -> None:
        self.N = N
        self.modulus = tuple(_cyclo_poly(N)) if N > 1 else (0, 1)
        self.degree = len(self.modulus) - 1
        # zeta^j written in the power basis, sparse, for 0 <= j < N
        table = []
        phi = self.degree
        mod = self.modulus
        for j in range(max(N, 1)):
            if N == 1:
                table.append(((0, 1),))
                continue
            if j < phi:
                table.append(((j, 1),))
                continue
            vec = [0] * phi
            for k, c in table[j - 1]:
                if k + 1 < phi:
                    vec[k + 1] += c
                else:
                    for i in range(phi):
                        vec[i] -= c * mod[i]
            table.append(tuple((i, c) for i, c in enumerate(vec) if c))
        self._table = table
        self._flint_modulus = flint.fmpz_poly(list(self.modulus))
        self._unit_basis = unit_group_structure(N) if N > 2 else []

    def __repr__(self) -> str:
        return f"CycloField({self.N})"

    # --- constructors -------------------------------------------------
    def elem(self, coeffs: Sequence) -> "CycloElem":
        """Element with the given power-basis coordinates (any length, reduced)."""
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for c in fr:
            den = den * c.denominator // math.gcd(den, c.denominator)
        ints = [int(c * den) for c in fr]
        return self._from_long(ints, den)

    def _from_long(self, ints: Sequence[int], den: int = 1) -> "CycloElem":
        phi = self.degree
        if len(ints) <= phi:
            vec = list(ints) + [0] * (phi - len(ints))
        else:
            vec = [0] * phi
            table = self._table
            N = self.N
            for j, c in enumerate(ints):
                if c:
                    if j < phi:
                        vec[j] += c
                    else:
                        for k, v in table[j % N]:
                            vec[k] += c * v
        return CycloElem._make(self, vec, den)

    def __call__(self, x) -> "CycloElem":
        if isinstance(x, CycloElem):
            if x.field is self:
                return x
            return embed(x, self.N)
        if isinstance(x, (int, Fraction)):
            return self.rational(x)
        return self.elem(x)

    def rational(self, x) -> "CycloElem":
        x = Fraction(x)
        vec = [0] * self.degree
        vec[0] = x.numerator
        return CycloElem._make(self, vec, x.denominator)

    @cached_property
    def zero(self) -> "CycloElem":
        return self.rational(0)

    @cached_property
    def one(self) -> "CycloElem":
        return self.rational(1)

    def zeta(self, k: int = 1) -> "CycloElem":
        """The root of unity zeta_N^k."""
        return self._from_long([0] * (k % self.N) + [1]) if self.N > 1 else self.one

    @cached_property
    def units(self) -> list[int]:
        return units_mod(self.N)

    def aut(self, d: int) -> "GaloisAut":
        return GaloisAut(d, self.N)

    def random_element(self, rng, height: int = 3, density: float = 1.0) -> "CycloElem":
        coeffs = []
        for _ in range(self.degree):
            if rng.random() <= density:
                coeffs.append(Fraction(rng.randint(-height, height), rng.randint(1, 2)))
            else:
                coeffs.append(0)
        return self.elem(coeffs)


class CycloElem:
    """An element of K_N; immutable, hashable, exact."""

    __slots__ = ("field", "nums", "den", "_hash")

    def __init__(self, field: CycloField, coeffs: Sequence):
        other = field.elem(coeffs)
        self.field = field
        self.nums = other.nums
        self.den = other.den
        self._hash = None

    @classmethod
    def _make(cls, field: CycloField, vec: list[int], den: int) -> "CycloElem":
        if den < 0:
            vec = [-c for c in vec]
            den = -den
        if den != 1:
            g = math.gcd(den, *vec)
            if g != 1:
                vec = [c // g for c in vec]
                den //= g
        self = object.__new__(cls)
        self.field = field
        self.nums = tuple(vec)
        self.den = den
        self._hash = None
        return self

    # --- inspection ---------------------------------------------------
    @property
    def coeffs(self) -> list[Fraction]:
        return [Fraction(c, self.den) for c in self.nums]

    def is_zero(self) -> bool:
        return not any(self.nums)

    def __bool__(self) -> bool:
        return any(self.nums)

    def is_rational(self) -> bool:
        return not any(self.nums[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self!r} is not rational")
        return Fraction(self.nums[0], self.den)

    def height(self) -> int:
        return max(max(abs(c) for c in self.nums), self.den)

    def __repr__(self) -> str:
        terms = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
            if not mono:
                terms.append(str(c))
            elif c == 1:
                terms.append(mono)
            elif c == -1:
                terms.append("-" + mono)
            else:
                terms.append(f"({c})*{mono}")
        body = " + ".join(terms) if terms else "0"
        return f"[{body}]_{self.field.N}"

    def __eq__(self, other) -> bool:
        if isinstance(other, CycloElem):
            if other.field is not self.field:
                return False
            return self.den == other.den and self.nums == other.nums
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self.nums[0], self.den) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_rational():
                self._hash = hash(Fraction(self.nums[0], self.den))
            else:
                self._hash = hash((self.field.N, self.nums, self.den))
        return self._hash

    # --- arithmetic ---------------------------------------------------
    def _coerce(self, other) -> "CycloElem":
        if isinstance(other, CycloElem):
            if other.field is not self.field:
                raise TypeError(f"mixed fields K_{self.field.N} and K_{other.field.N}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            vec = [a + b for a, b in zip(self.nums, other.nums)]
            return CycloElem._make(self.field, vec, self.den)
        d1, d2 = self.den, other.den
        vec = [a * d2 + b * d1 for a, b in zip(self.nums, other.nums)]
        return CycloElem._make(self.field, vec, d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return CycloElem._make(self.field, [-a for a in self.nums], self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return CycloElem._make(
                self.field, [a * other.numerator for a in self.nums], self.den * other.denominator
            )
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        f = self.field
        x, y = self.nums, other.nums
        if not any(x[1:]):
            return CycloElem._make(f, [x[0] * b for b in y], self.den * other.den)
        if not any(y[1:]):
            return CycloElem._make(f, [a * y[0] for a in x], self.den * other.den)
        phi = f.degree
        if phi >= FLINT_MUL_DEGREE:
            r = (flint.fmpz_poly(list(x)) * flint.fmpz_poly(list(y))) % f._flint_modulus
            vec = [int(c) for c in r.coeffs()]
            vec += [0] * (phi - len(vec))
            return CycloElem._make(f, vec, self.den * other.den)
        out = [0] * (2 * phi - 1)
        ynz = [(j, b) for j, b in enumerate(y) if b]
        for i, a in enumerate(x):
            if a:
                for j, b in ynz:
                    out[i + j] += a * b
        vec = out[:phi]
        table = f._table
        N = f.N
        for j in range(phi, 2 * phi - 1):
            c = out[j]
            if c:
                for k, v in table[j % N]:
                    vec[k] += c * v
        return CycloElem._make(f, vec, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "CycloElem":
        if self.is_zero():
            raise DivisionByZero("inverse of zero in a cyclotomic field")
        f = self.field
        if self.is_rational():
            return f.rational(Fraction(self.den, self.nums[0]))
        # a^-1 = (product of the other conjugates) / norm(a)
        x = CycloElem._make(f, list(self.nums), 1)
        cof = f.one
        for g, n in f._unit_basis:
            # prefix products P_m = prod_{i<m} sigma_g^i(x), built by doubling
            m, P = 1, x
            target = n - 1
            acc, acc_len = f.one, 0
            bits = []
            while m <= target:
                bits.append((m, P))
                P = P * P.galois(pow(g, m, f.N))
                m *= 2
            for m, Pm in reversed(bits):
                if acc_len + m <= target:
                    acc = acc * Pm.galois(pow(g, acc_len, f.N))
                    acc_len += m
            c = acc.galois(g)
            cof = cof * c
            x = x * c
        norm = x.nums[0]
        if any(x.nums[1:]) or norm == 0:
            raise DivisionByZero("norm computation failed; element not invertible")
        return CycloElem._make(f, [c * self.den for c in cof.nums], norm * cof.den)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.field.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # --- Galois action ------------------------------------------------
    def galois(self, d: int) -> "CycloElem":
        """Image under sigma_d : zeta -> zeta^d."""
        f = self.field
        N = f.N
        d %= N if N > 1 else 1
        if d == 1 % max(N, 1) or N == 1 or not any(self.nums[1:]):
            return self
        if math.gcd(d, N) != 1:
            raise NotAUnit(f"{d} is not a unit modulo {N}")
        vec = [0] * f.degree
        table = f._table
        for i, c in enumerate(self.nums):
            if c:
                for k, v in table[(d * i) % N]:
                    vec[k] += c * v
        return CycloElem._make(f, vec, self.den)

    # --- finite-field reduction --------------------------------------
    def reduce_mod(self, ell: int, z: int) -> int:
        """Image in F_ell under zeta -> z; z must be a root of Phi_N mod ell."""
        acc = 0
        for c in reversed(self.nums):
            acc = (acc * z + c) % ell
        if self.den % ell == 0:
            raise ZeroDivisionError("denominator divisible by the reduction prime")
        return acc * pow(self.den, -1, ell) % ell


def _poly_inverse_mod(a: list[int], m: list[int]) -> list[Fraction]:
    """Inverse of a(x) modulo m(x) over Q by the extended Euclidean algorithm."""

    def trim(p):
        while p and p[-1] == 0:
            p.pop()
        return p

    r0 = [Fraction(c) for c in m]
    r1 = trim([Fraction(c) for c in a])
    s0: list[Fraction] = []
    s1: list[Fraction] = [Fraction(1)]
    while len(r1) > 1:
        q = [Fraction(0)] * (len(r0) - len(r1) + 1)
        r = list(r0)
        lead = r1[-1]
        for i in range(len(r) - len(r1), -1, -1):
            c = r[i + len(r1) - 1] / lead
            if c:
                q[i] = c
                for j, b in enumerate(r1):
                    r[i + j] -= c * b
        trim(r)
        # s_new = s0 - q*s1
        prod = [Fraction(0)] * (len(q) + len(s1))
        for i, qa in enumerate(q):
            if qa:
                for j, sb in enumerate(s1):
                    prod[i + j] += qa * sb
        s_new = [Fraction(0)] * max(len(s0), len(prod))
        for i, c in enumerate(s0):
            s_new[i] += c
        for i, c in enumerate(prod):
            s_new[i] -= c
        r0, r1 = r1, r
        s0, s1 = s1, trim(s_new)
    if not r1:
        raise DivisionByZero("element is not invertible (shares a factor with the modulus)")
    c = r1[0]
    return [x / c for x in s1]


class GaloisAut:
    """The automorphism sigma_d of K_N with zeta_N -> zeta_N^d."""

    __slots__ = ("d", "N")

    def __init__(self, d: int, N: int):
        if N > 2 and math.gcd(d, N) != 1:
            raise NotAUnit(f"{d} is not a unit modulo {N}")
        self.N = N
        self.d = d % N if N > 2 else 1

    def __call__(self, x):
        return apply_aut(self, x)

    def __mul__(self, other: "GaloisAut") -> "GaloisAut":
        return GaloisAut(self.d * other.d, self.N)

    def __eq__(self, other) -> bool:
        return isinstance(other, GaloisAut) and (self.d, self.N) == (other.d, other.N)

    def __hash__(self) -> int:
        return hash((self.d, self.N))

    def __repr__(self) -> str:
        return f"sigma_{self.d} (mod {self.N})"


def apply_aut(sigma, x):
    """Apply sigma_d to anything exposing ``galois(d)`` (elements, maps, matrices)."""
    d = sigma.d if isinstance(sigma, GaloisAut) else int(sigma)
    if isinstance(sigma, GaloisAut) and isinstance(x, CycloElem):
        if x.field.N % sigma.N and sigma.N % x.field.N:
            raise NotAUnit(f"sigma mod {sigma.N} does not act on K_{x.field.N}")
    return x.galois(d)


def embed(a: CycloElem, M: int) -> CycloElem:
    """Image of a in K_M under zeta_N -> zeta_M^(M/N)."""
    N = a.field.N
    target = CycloField(M)
    if target.N % N:
        raise NotADivisor(f"{N} does not divide {M}")
    if target is a.field:
        return a
    step = target.N // N
    long = [0] * (target.N if target.N > 1 else 1)
    for i, c in enumerate(a.nums):
        if c:
            long[(i * step) % max(target.N, 1)] += c
    return target._from_long(long, a.den)


@lru_cache(maxsize=None)
def _descent_data(N: int, M: int):
    """Rows of K_M coordinates determining a K_N element, and the inverse map."""
    src, dst = CycloField(N), CycloField(M)
    cols = [embed(src.zeta(i), dst.N).coeffs for i in range(src.degree)]
    rows, pivots = [], []
    for r in range(dst.degree):
        cand = [cols[j][r] for j in range(src.degree)]
        trial = [list(x) for x in rows] + [cand]
        if _rank_fraction(trial) > len(rows):
            rows.append(cand)
            pivots.append(r)
        if len(rows) == src.degree:
            break
    return tuple(pivots), _invert_fraction(rows)


def _rank_fraction(rows: list[list[Fraction]]) -> int:
    m = [list(r) for r in rows]
    rk = 0
    for c in range(len(m[0]) if m else 0):
        piv = next((i for i in range(rk, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for i in range(len(m)):
            if i != rk and m[i][c]:
                f = m[i][c] / m[rk][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rk])]
        rk += 1
    return rk


def _invert_fraction(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(rows)
    m = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(i for i in range(c, n) if m[i][c])
        m[c], m[piv] = m[piv], m[c]
        inv = 1 / m[c][c]
        m[c] = [x * inv for x in m[c]]
        for i in range(n):
            if i != c and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return [r[n:] for r in m]


def descend(a: CycloElem, N: int) -> CycloElem:
    """The element of K_N whose image in K_M is a; NotASubfield when there is none."""
    F = CycloField(N)
    if a.field is F:
        return a
    if a.field.N % F.N:
        raise NotADivisor(f"K_{F.N} is not inside K_{a.field.N}")
    pivots, inv = _descent_data(F.N, a.field.N)
    vec = a.coeffs
    rhs = [vec[r] for r in pivots]
    x = F.elem([sum(c * v for c, v in zip(row, rhs)) for row in inv])
    if embed(x, a.field.N) != a:
        raise NotASubfield(f"element does not lie in K_{F.N}")
    return x


def unit_group_structure(N: int) -> list[tuple[int, int]]:
    """Independent generators of (Z/NZ)^* with their orders.

    Odd prime powers get the least primitive root; 2^m (m >= 3) gets -1 and 5.
    Other moduli fall back to a brute-force basis of the finite abelian group.
    """
    if N < 3:
        return []
    fac = factorize(N)
    if len(fac) == 1:
        (p, k), = fac.items()
        if p == 2:
            if k == 2:
                return [(3, 2)]
            return [(N - 1, 2), (5, 2 ** (k - 2))]
        phi = euler_phi(N)
        for g in range(2, N):
            if math.gcd(g, N) == 1 and multiplicative_order(g, N) == phi:
                return [(g, phi)]
    basis = abelian_basis(units_mod(N), N)
    return [(g, multiplicative_order(g, N)) for g in basis]


def _span(gens: Iterable[int], N: int) -> frozenset[int]:
    elems = {1 % N if N > 1 else 1}
    frontier = list(elems)
    gens = [g % N for g in gens] if N > 1 else []
    while frontier:
        new = []
        for x in frontier:
            for g in gens:
                y = x * g % N
                if y not in elems:
                    elems.add(y)
                    new.append(y)
        frontier = new
    return frozenset(elems)


def abelian_basis(elements: Sequence[int], N: int) -> list[int]:
    """Independent generators of a subgroup of (Z/NZ)^*, larger orders first.

    Searches ranks 1, 2, 3 by brute force; the groups met here have order at
    most a few hundred and rank at most two.
    """
    elems = sorted(set(elements))
    order = len(elems)
    if order == 1:
        return []
    orders = {g: multiplicative_order(g, N) for g in elems}
    by_order = sorted(elems, key=lambda g: (-orders[g], g))
    for g in by_order:
        if orders[g] == order:
            return [g]
    for g1 in by_order:
        s1 = _span([g1], N)
        for g2 in by_order:
            if orders[g1] * orders[g2] != order or g2 in s1:
                continue
            s2 = _span([g2], N)
            if len(s1 & s2) == 1:
                return [g1, g2]
    for g1 in by_order:
        s1 = _span([g1], N)
        for g2 in by_order:
            s12 = _span([g1, g2], N)
            if len(s12) != orders[g1] * orders[g2]:
                continue
            for g3 in by_order:
                if orders[g1] * orders[g2] * orders[g3] == order and len(s12 & _span([g3], N)) == 1:
                    return [g1, g2, g3]
    raise ValueError("group of rank above three")


class SubfieldSpec:
    """The subfield K_N^H, handled through the subgroup H of (Z/NZ)^*."""

    def __init__(self, N: int, generators: Iterable[int] = ()):
        self.field = CycloField(N)
        self.N = self.field.N
        N = self.N
        gens = [int(g) for g in generators]
        for g in gens:
            if N > 2 and math.gcd(g, N) != 1:
                raise NotAUnit(f"{g} is not a unit modulo {N}")
        self.elements = _span(gens, N) if N > 2 else frozenset({1})
        # canonical generating set: greedy over sorted elements
        canon: list[int] = []
        span = frozenset({1}) if N > 2 else self.elements
        for x in sorted(self.elements):
            if x not in span:
                canon.append(x)
                span = _span(canon, N)
        self.generators = tuple(canon)

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def degree(self) -> int:
        """[K : Q]."""
        return self.field.degree // self.order

    def is_rational(self) -> bool:
        return self.degree == 1

    @cached_property
    def fixed_basis(self) -> list[CycloElem]:
        return fixed_field_basis(self)

    def contains(self, a: CycloElem) -> bool:
        return is_in_subfield(a, self)

    @cached_property
    def conductor(self) -> int:
        """Least g | N with K inside K_g."""
        N = self.N
        if N <= 2:
            return 1
        for g in _divisors(N):
            if all(d in self.elements for d in units_mod(N) if d % g == 1 % g):
                return g
        return N

    def restrict_to(self, N: int) -> "SubfieldSpec":
        """The same field K presented inside K_N (K must lie in K_N)."""
        F = CycloField(N)
        if F.N == self.N:
            return self
        cond = self.conductor
        if F.N % cond:
            raise NotADivisor(f"the field has conductor {cond}, not inside K_{F.N}")
        if cond <= 2:
            return SubfieldSpec(F.N, units_mod(F.N))
        image = {e % cond for e in self.elements}
        return SubfieldSpec(F.N, [d for d in units_mod(F.N) if d % cond in image])

    def __eq__(self, other) -> bool:
        return isinstance(other, SubfieldSpec) and (self.N, self.elements) == (other.N, other.elements)

    def __hash__(self) -> int:
        return hash((self.N, self.elements))

    def sort_key(self) -> tuple:
        return (self.N, -self.order, sorted(self.elements))

    def __repr__(self) -> str:
        return f"SubfieldSpec(N={self.N}, H=<{', '.join(map(str, self.generators))}>, degree={self.degree})"

    def to_json(self) -> dict:
        return {"conductor": self.N, "subgroup_generators": list(self.generators)}

    @classmethod
    def from_json(cls, data: dict) -> "SubfieldSpec":
        return cls(int(data["conductor"]), data.get("subgroup_generators", []))


def enumerate_subgroups(N: int) -> list[SubfieldSpec]:
    """All subgroups H of (Z/NZ)^*, smallest first, each paired with K_N^H."""
    units = units_mod(N)
    seen: dict[frozenset, SubfieldSpec] = {}
    for a in units:
        for b in units:
            if b < a:
                continue
            H = SubfieldSpec(N, [a, b])
            seen.setdefault(H.elements, H)
    out = list(seen.values())
    # rank <= 2 covers prime powers; close under joins for safety elsewhere
    changed = True
    while changed:
        changed = False
        for H1 in list(out):
            for H2 in list(out):
                J = SubfieldSpec(N, H1.generators + H2.generators)
                if J.elements not in seen:
                    seen[J.elements] = J
                    out.append(J)
                    changed = True
    return sorted(out, key=lambda H: (H.order, sorted(H.elements)))


def _rank_insert(rows: list[list[Fraction]], pivots: list[int], vec: list[Fraction]) -> bool:
    """Reduce vec against echelon rows; append it if independent."""
    v = list(vec)
    for row, p in zip(rows, pivots):
        if v[p]:
            c = v[p] / row[p]
            v = [a - c * b for a, b in zip(v, row)]
    for i, c in enumerate(v):
        if c:
            rows.append(v)
            pivots.append(i)
            return True
    return False


def fixed_field_basis(H: SubfieldSpec) -> list[CycloElem]:
    """Q-basis of K_N^H made of Gauss periods sum_{h in H} zeta^(i h)."""
    F = H.field
    N = F.N
    target = H.degree
    rows: list[list[Fraction]] = []
    pivots: list[int] = []
    basis: list[CycloElem] = []
    for i in range(max(N, 1)):
        long = [0] * max(N, 1)
        for h in H.elements:
            long[(i * h) % max(N, 1)] += 1
        eta = F._from_long(long)
        if _rank_insert(rows, pivots, eta.coeffs):
            basis.append(eta)
            if len(basis) == target:
                break
    return basis


def is_in_subfield(a: CycloElem, H: SubfieldSpec) -> bool:
    if a.field is not H.field:
        if H.field.N % a.field.N == 0:
            a = embed(a, H.N)
        else:
            raise NotADivisor(f"K_{a.field.N} is not inside K_{H.N}")
    return all(a.galois(g) == a for g in H.generators)


def relative_norm(a: CycloElem, G: Iterable) -> CycloElem:
    """Product of sigma(a) over the listed automorphisms."""
    result = a.field.one
    for s in G:
        result = result * apply_aut(s, a)
    return result
