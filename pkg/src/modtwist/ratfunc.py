"""Polynomials, rational functions, Mobius maps and truncated Laurent series
over a cyclotomic field.

Conventions
-----------
* A ``Mobius`` g = [[a, b], [c, d]] acts on the line by t -> (a t + b)/(c t + d);
  the product g*h is the composite map g(h(t)).
* ``compose_mobius(pi, g)`` is pi(g(t)); so composing with g and then h gives
  pi o (g*h), a right action.
* Rational functions are kept coprime with a monic denominator, which makes
  equality and "all coefficients lie in K" representation independent.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

import flint

from .cyclotomic import CycloElem, CycloField, SubfieldSpec, embed, factorize, is_in_subfield, units_mod
from .errors import Indeterminate, InsufficientPrecision, SingularMatrix

__all__ = [
    "INF",
    "Poly",
    "RatFunc",
    "Mobius",
    "LaurentSeries",
    "compose_mobius",
    "galois_apply_ratfunc",
    "coefficients_in",
    "evaluate",
    "series_compose",
    "mobius_group_ops",
    "elem_to_json",
    "elem_from_json",
]


class _Infinity:
    """The point at infinity of the projective line."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (_Infinity, ())

    def galois(self, d):
        return self


INF = _Infinity()


def elem_to_json(a: CycloElem) -> list[str]:
    return [f"{c.numerator}/{c.denominator}" for c in a.coeffs]


def elem_from_json(F: CycloField, data) -> CycloElem:
    if isinstance(data, dict):
        sub = CycloField(int(data["conductor"]))
        return embed(elem_from_json(sub, data["coeffs"]), F.N)
    if isinstance(data, (int, str)) and not isinstance(data, bool):
        return F.rational(Fraction(data))
    if len(data) != F.degree:
        raise ValueError(f"expected {F.degree} coordinates for K_{F.N}, got {len(data)}")
    return F.elem([Fraction(x) for x in data])


# ---------------------------------------------------------------------------
# polynomials


class Poly:
    """Univariate polynomial over K_N, coefficients in ascending degree."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: CycloField, coeffs: Iterable = ()):
        cs = [field(c) if not isinstance(c, CycloElem) else c for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls, F: CycloField) -> "Poly":
        return cls(F, [F.zero, F.one])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> CycloElem:
        return self.coeffs[-1] if self.coeffs else self.field.zero

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "Poly(0)"
        return "Poly(" + " + ".join(f"{c!r}*t^{i}" for i, c in enumerate(self.coeffs) if c) + ")"

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.field is other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly(self.field, [other])

    def __add__(self, other) -> "Poly":
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return Poly(self.field, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.field, [-c for c in self.coeffs])

    def __sub__(self, other) -> "Poly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Poly":
        return (-self) + other

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = self.field(other) if not isinstance(other, CycloElem) else other
            if not c:
                return Poly(self.field)
            return Poly(self.field, [x * c for x in self.coeffs])
        if not self.coeffs or not other.coeffs:
            return Poly(self.field)
        out: list = [None] * (len(self.coeffs) + len(other.coeffs) - 1)
        bnz = [(j, b) for j, b in enumerate(other.coeffs) if b]
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in bnz:
                t = a * b
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        zero = self.field.zero
        return Poly(self.field, [zero if x is None else x for x in out])

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        result = Poly(self.field, [self.field.one])
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def divmod(self, other: "Poly") -> tuple["Poly", "Poly"]:
        if not other.coeffs:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        if len(r) - 1 < db:
            return Poly(self.field), self
        inv = other.lc.inverse()
        q = [self.field.zero] * (len(r) - db)
        for i in range(len(r) - 1, db - 1, -1):
            c = r[i]
            if c:
                c = c * inv
                q[i - db] = c
                for j, b in enumerate(other.coeffs):
                    if b:
                        r[i - db + j] = r[i - db + j] - c * b
        return Poly(self.field, q), Poly(self.field, r[:db])

    def __floordiv__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return self.divmod(other)[1]

    def monic(self) -> "Poly":
        if not self.coeffs or self.lc == 1:
            return self
        inv = self.lc.inverse()
        return Poly(self.field, [c * inv for c in self.coeffs])

    def derivative(self) -> "Poly":
        return Poly(self.field, [c * i for i, c in enumerate(self.coeffs)][1:])

    def __call__(self, x: CycloElem) -> CycloElem:
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def homogeneous(self, X: "Poly", Y: "Poly", degree: int) -> "Poly":
        """sum c_i X^i Y^(degree-i)."""
        return sum_polys(self.field, homogeneous_terms(self.coeffs, X, Y, degree))

    def galois(self, d: int) -> "Poly":
        return Poly(self.field, [c.galois(d) for c in self.coeffs])

    def embed(self, M: int) -> "Poly":
        F = CycloField(M)
        return Poly(F, [embed(c, F.N) for c in self.coeffs])

    def to_json(self) -> list:
        return [elem_to_json(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, F: CycloField, data) -> "Poly":
        return cls(F, [elem_from_json(F, c) for c in data])


def sum_polys(F: CycloField, polys: Iterable[Poly]) -> Poly:
    acc = Poly(F)
    for p in polys:
        acc = acc + p
    return acc


def homogeneous_terms(coeffs: Sequence[CycloElem], X: Poly, Y: Poly, degree: int) -> list[Poly]:
    F = X.field
    Xp = [Poly(F, [F.one])]
    Yp = [Poly(F, [F.one])]
    for _ in range(degree):
        Xp.append(Xp[-1] * X)
        Yp.append(Yp[-1] * Y)
    return [Xp[i] * Yp[degree - i] * c for i, c in enumerate(coeffs) if c]


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd over K_N.

    Computed modulo primes l = 1 mod N, where K_N splits into copies of F_l, and
    recovered by CRT and rational reconstruction; the candidate is accepted once
    it is stable across a prime and divides both inputs exactly.  Euclid over
    K_N itself suffers from coefficient growth.
    """
    if not b.coeffs:
        return a.monic()
    if not a.coeffs:
        return b.monic()
    F = a.field
    if a.degree == 0 or b.degree == 0:
        return Poly(F, [F.one])
    d_best = None
    residues: list[list[int]] = []
    modulus = 1
    previous = None
    for ell, points, vinv in _split_primes(F):
        imgs = []
        for P in (a, b):
            comps = _reduce_components(P, points, ell)
            if comps is None:
                break
            imgs.append(comps)
        if len(imgs) < 2:
            continue  # l divides a denominator or a leading coefficient
        gs = [x.gcd(y) for x, y in zip(*imgs)]
        degs = {g.degree() for g in gs}
        if len(degs) > 1:
            continue  # unlucky: some component has a spurious common factor
        d = degs.pop()
        if d == 0:
            return Poly(F, [F.one])
        if d_best is not None and d > d_best:
            continue
        # coordinates of the coefficients of x^0..x^(d-1) modulo l
        coords = []
        for i in range(d):
            vals = [int(g.coeffs()[i]) if i < len(g.coeffs()) else 0 for g in gs]
            coords.extend(_solve_vandermonde(vinv, vals, ell))
        if d_best is None or d < d_best:
            d_best, residues, modulus, previous = d, coords, ell, None
        else:
            inv = pow(modulus % ell, -1, ell)
            residues = [x + modulus * ((v - x) * inv % ell) for x, v in zip(residues, coords)]
            modulus *= ell
        cand = _reconstruct(residues, modulus, F, d)
        if cand is None:
            continue
        if cand == previous and not (a % cand) and not (b % cand):
            return cand
        previous = cand


_PRIME_DATA: dict[int, list] = {}


def _split_primes(F: CycloField):
    """Yield (l, roots of Phi_N mod l, inverse Vandermonde matrix mod l) for primes l = 1 mod N."""
    cache = _PRIME_DATA.setdefault(F.N, [])
    yield from cache
    for item in _new_split_primes(F, cache[-1][0] if cache else None):
        cache.append(item)
        yield item


def _new_split_primes(F: CycloField, after: int | None):
    N = F.N
    step = N if N > 2 else 2
    ell = after if after is not None else (1 << 60) // step * step + 1
    while True:
        ell += step
        if not flint.fmpz(ell).is_prime():
            continue
        if N <= 2:
            yield ell, [1], [[1]]
            continue
        w = None
        for g in range(2, 200):
            c = pow(g, (ell - 1) // N, ell)
            if all(pow(c, N // q, ell) != 1 for q in factorize(N)):
                w = c
                break
        if w is None:
            continue
        points = [pow(w, k, ell) for k in units_mod(N)]
        V = flint.nmod_mat([[pow(r, k, ell) for k in range(F.degree)] for r in points], ell)
        vinv = V.inv()
        yield ell, points, [[int(vinv[i, j]) for j in range(F.degree)] for i in range(F.degree)]


def _reduce_components(P: Poly, points, ell):
    out = []
    dens = [pow(c.den, -1, ell) if c.den % ell else None for c in P.coeffs]
    if any(x is None for x in dens):
        return None
    for r in points:
        cs = []
        for c, dinv in zip(P.coeffs, dens):
            acc = 0
            for n in reversed(c.nums):
                acc = (acc * r + n) % ell
            cs.append(acc * dinv % ell)
        if not cs[-1]:
            return None
        out.append(flint.nmod_poly(cs, ell))
    return out


def _solve_vandermonde(vinv, vals, ell):
    return [sum(x * v for x, v in zip(row, vals)) % ell for row in vinv]


def _ratrec(a: int, m: int):
    """n/d = a mod m with |n|, d <= sqrt(m/2), or None."""
    bound = math.isqrt(m // 2)
    r0, r1, s0, s1 = m, a % m, 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    return Fraction(r1, s1)


def _reconstruct(residues, modulus, F: CycloField, d: int):
    phi = F.degree
    coeffs = []
    for i in range(d):
        fr = [_ratrec(x, modulus) for x in residues[i * phi:(i + 1) * phi]]
        if any(f is None for f in fr):
            return None
        coeffs.append(F.elem(fr))
    return Poly(F, coeffs + [F.one])


# ---------------------------------------------------------------------------
# rational functions


class RatFunc:
    """num/den over K_N in coprime form with monic denominator."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly | None = None, *, reduced: bool = False):
        F = num.field
        if den is None:
            den = Poly(F, [F.one])
        if den.field is not F:
            raise TypeError("numerator and denominator over different fields")
        if not den.coeffs:
            raise ZeroDivisionError("zero denominator")
        if not reduced and den.degree > 0 and num.coeffs:
            g = poly_gcd(num, den)
            if g.degree > 0:
                num = num // g
                den = den // g
        if not num.coeffs:
            den = Poly(F, [F.one])
        elif den.lc != 1:
            inv = den.lc.inverse()
            num = num * inv
            den = den * inv
        self.num = num
        self.den = den

    @classmethod
    def identity(cls, F: CycloField) -> "RatFunc":
        return cls(Poly.x(F), reduced=True)

    @classmethod
    def from_coeffs(cls, F: CycloField, num: Sequence, den: Sequence = (1,)) -> "RatFunc":
        return cls(Poly(F, num), Poly(F, den))

    @property
    def field(self) -> CycloField:
        return self.num.field

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree)

    def coefficients(self) -> list[CycloElem]:
        return list(self.num.coeffs) + list(self.den.coeffs)

    def __eq__(self, other) -> bool:
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    def __repr__(self) -> str:
        return f"RatFunc({self.num!r} / {self.den!r})"

    def galois(self, d: int) -> "RatFunc":
        return RatFunc(self.num.galois(d), self.den.galois(d), reduced=True)

    def embed(self, M: int) -> "RatFunc":
        return RatFunc(self.num.embed(M), self.den.embed(M), reduced=True)

    def __call__(self, tau):
        return evaluate(self, tau)

    def to_json(self) -> dict:
        return {"conductor": self.field.N, "num": self.num.to_json(), "den": self.den.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "RatFunc":
        F = CycloField(int(data["conductor"]))
        return cls(Poly.from_json(F, data["num"]), Poly.from_json(F, data.get("den", [["1"]])))


def evaluate(pi: RatFunc, tau):
    """pi(tau) with tau a field element or INF."""
    F = pi.field
    if tau is INF:
        dn, dd = pi.num.degree, pi.den.degree
        if dn > dd:
            return INF
        if dn == dd:
            return pi.num.lc / pi.den.lc
        return F.zero
    tau = F(tau)
    n, m = pi.num(tau), pi.den(tau)
    if not m:
        if not n:
            raise Indeterminate("numerator and denominator both vanish")
        return INF
    return n / m


def galois_apply_ratfunc(sigma, pi: RatFunc) -> RatFunc:
    d = sigma.d if hasattr(sigma, "d") else int(sigma)
    return pi.galois(d)


def coefficients_in(pi: RatFunc, H: SubfieldSpec) -> bool:
    return all(is_in_subfield(c, H) for c in pi.coefficients())


def compose_mobius(pi: RatFunc, g: "Mobius") -> RatFunc:
    """pi(g(t)), i.e. substitute t <- (a t + b)/(c t + d)."""
    if g.field is not pi.field:
        M = _lcm(g.field.N, pi.field.N)
        pi, g = pi.embed(M), g.embed(M)
    F = pi.field
    a, b, c, d = g.entries
    X = Poly(F, [b, a])
    Y = Poly(F, [d, c])
    deg = pi.degree
    Ypow = [Poly(F, [F.one])]
    for _ in range(deg):
        Ypow.append(Ypow[-1] * Y)

    def homogenize(P: Poly) -> Poly:
        # Horner: S_k = S_{k+1} X + p_k Y^(deg-k), S_0 = sum p_i X^i Y^(deg-i)
        acc = Poly(F)
        for k in range(deg, -1, -1):
            acc = acc * X
            if k < len(P.coeffs) and P.coeffs[k]:
                acc = acc + Ypow[deg - k] * P.coeffs[k]
        return acc

    return RatFunc(homogenize(pi.num), homogenize(pi.den), reduced=True)


def _lcm(a: int, b: int) -> int:
    from math import gcd

    return a * b // gcd(a, b)


# ---------------------------------------------------------------------------
# Mobius maps


class Mobius:
    """Element of PGL2(K_N), stored with its first nonzero entry scaled to 1."""

    __slots__ = ("entries", "_hash")

    def __init__(self, a, b, c, d, *, field: CycloField | None = None, normalized: bool = False):
        if field is None:
            field = next(x.field for x in (a, b, c, d) if isinstance(x, CycloElem))
        a, b, c, d = (field(x) for x in (a, b, c, d))
        if not normalized:
            if not (a * d - b * c):
                raise SingularMatrix("Mobius matrix has zero determinant")
            lead = next(x for x in (a, b, c, d) if x)
            if lead != 1:
                inv = lead.inverse()
                a, b, c, d = a * inv, b * inv, c * inv, d * inv
        self.entries = (a, b, c, d)
        self._hash = None

    @classmethod
    def from_matrix(cls, A) -> "Mobius":
        (a, b), (c, d) = A
        return cls(a, b, c, d)

    @classmethod
    def identity(cls, F: CycloField) -> "Mobius":
        return cls(F.one, F.zero, F.zero, F.one, field=F, normalized=True)

    @property
    def field(self) -> CycloField:
        return self.entries[0].field

    def matrix(self):
        a, b, c, d = self.entries
        return ((a, b), (c, d))

    def det(self) -> CycloElem:
        a, b, c, d = self.entries
        return a * d - b * c

    def __mul__(self, other: "Mobius") -> "Mobius":
        if other.field is not self.field:
            M = _lcm(self.field.N, other.field.N)
            return self.embed(M) * other.embed(M)
        a, b, c, d = self.entries
        e, f, g, h = other.entries
        return Mobius(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h, field=self.field)

    def inverse(self) -> "Mobius":
        a, b, c, d = self.entries
        return Mobius(d, -b, -c, a, field=self.field)

    def __pow__(self, e: int) -> "Mobius":
        if e < 0:
            return self.inverse() ** (-e)
        result = Mobius.identity(self.field)
        for _ in range(e):
            result = result * self
        return result

    def is_identity(self) -> bool:
        a, b, c, d = self.entries
        return a == 1 and not b and not c and d == 1

    def order(self, limit: int = 10_000) -> int:
        x, k = self, 1
        while not x.is_identity():
            x = x * self
            k += 1
            if k > limit:
                raise ValueError("element of infinite (or very large) order")
        return k

    def __eq__(self, other) -> bool:
        return isinstance(other, Mobius) and self.entries == other.entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.entries)
        return self._hash

    def __repr__(self) -> str:
        a, b, c, d = self.entries
        return f"Mobius([[{a!r}, {b!r}], [{c!r}, {d!r}]])"

    def galois(self, d: int) -> "Mobius":
        return Mobius(*(x.galois(d) for x in self.entries), field=self.field, normalized=True)

    def embed(self, M: int) -> "Mobius":
        F = CycloField(M)
        return Mobius(*(embed(x, F.N) for x in self.entries), field=F, normalized=True)

    def __call__(self, tau):
        a, b, c, d = self.entries
        if tau is INF:
            return INF if not c else a / c
        den = c * tau + d
        if not den:
            return INF
        return (a * tau + b) / den

    def sort_key(self) -> tuple:
        return tuple((x.den, x.nums) for x in self.entries)

    def to_json(self) -> list:
        a, b, c, d = self.entries
        return [[elem_to_json(a), elem_to_json(b)], [elem_to_json(c), elem_to_json(d)]]

    @classmethod
    def from_json(cls, F: CycloField, data) -> "Mobius":
        (a, b), (c, d) = data
        return cls(*(elem_from_json(F, x) for x in (a, b, c, d)), field=F)


def mobius_group_ops(g: Mobius, h: Mobius | None = None, op: str = "mul"):
    if op == "mul":
        return g * h
    if op == "inv":
        return g.inverse()
    if op == "eq":
        return g == h
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Laurent series in q^(1/w)


class LaurentSeries:
    """sum_{k >= v} c_k q^(k/w) known modulo q^(prec/w); prec None means exact."""

    __slots__ = ("field", "width", "valuation", "coeffs", "precision")

    def __init__(self, field: CycloField, width: int, valuation: int, coeffs: Sequence, precision):
        cs = [field(c) if not isinstance(c, CycloElem) else c for c in coeffs]
        if precision is not None:
            if precision < valuation:
                valuation = precision
                cs = []
            cs = cs[: precision - valuation]
            cs += [field.zero] * (precision - valuation - len(cs))
        else:
            while cs and not cs[-1]:
                cs.pop()
        # strip leading zeros
        k = 0
        while k < len(cs) and not cs[k]:
            k += 1
        if k:
            cs = cs[k:]
            valuation += k
        if precision is None and not cs:
            valuation = 0
        self.field = field
        self.width = width
        self.valuation = valuation
        self.coeffs = cs
        self.precision = precision

    def __repr__(self) -> str:
        terms = [f"{c!r}*q^({self.valuation + i}/{self.width})" for i, c in enumerate(self.coeffs) if c]
        tail = f" + O(q^({self.precision}/{self.width}))" if self.precision is not None else ""
        return "LaurentSeries(" + (" + ".join(terms) or "0") + tail + ")"

    @classmethod
    def constant(cls, F: CycloField, c, width: int = 1) -> "LaurentSeries":
        return cls(F, width, 0, [F(c)], None)

    def is_exact(self) -> bool:
        return self.precision is None

    def coefficient(self, k: int) -> CycloElem:
        """Coefficient of q^(k/w)."""
        if self.precision is not None and k >= self.precision:
            raise InsufficientPrecision(f"q^({k}/{self.width}) is beyond the known precision")
        i = k - self.valuation
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return self.field.zero

    def _end(self) -> int:
        return self.valuation + len(self.coeffs)

    def _match(self, other: "LaurentSeries"):
        if self.width == other.width:
            return self, other
        from math import lcm

        w = lcm(self.width, other.width)
        return self.with_width(w), other.with_width(w)

    def with_width(self, w: int) -> "LaurentSeries":
        if w % self.width:
            raise ValueError("new width must be a multiple of the old one")
        s = w // self.width
        cs = []
        for i, c in enumerate(self.coeffs):
            cs.append(c)
            if i < len(self.coeffs) - 1 or self.precision is not None:
                cs.extend([self.field.zero] * (s - 1))
        prec = None if self.precision is None else self.precision * s
        return LaurentSeries(self.field, w, self.valuation * s, cs, prec)

    def __add__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(self.field, other, self.width)
        a, b = self._match(other)
        precs = [p for p in (a.precision, b.precision) if p is not None]
        prec = min(precs) if precs else None
        lo = min(a.valuation, b.valuation)
        hi = prec if prec is not None else max(a._end(), b._end())
        cs = [a.coefficient(k) + b.coefficient(k) if k < hi else None for k in range(lo, hi)]
        return LaurentSeries(a.field, a.width, lo, cs, prec)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries(self.field, self.width, self.valuation, [-c for c in self.coeffs], self.precision)

    def __sub__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.constant(self.field, other, self.width)
        return self + (-other)

    def __mul__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            c = self.field(other)
            return LaurentSeries(self.field, self.width, self.valuation,
                                 [x * c for x in self.coeffs], self.precision)
        a, b = self._match(other)
        for x in (a, b):
            if x.precision is None and not x.coeffs:
                return LaurentSeries(a.field, a.width, 0, [], None)  # exact zero
        v = a.valuation + b.valuation
        precs = []
        if a.precision is not None:
            precs.append(a.precision + b.valuation)
        if b.precision is not None:
            precs.append(b.precision + a.valuation)
        prec = min(precs) if precs else None
        n = (prec - v) if prec is not None else len(a.coeffs) + len(b.coeffs) - 1
        n = max(n, 0)
        out: list = [None] * n
        for i, x in enumerate(a.coeffs[:n]):
            if not x:
                continue
            for j, y in enumerate(b.coeffs[: n - i]):
                if y:
                    t = x * y
                    out[i + j] = t if out[i + j] is None else out[i + j] + t
        zero = a.field.zero
        return LaurentSeries(a.field, a.width, v, [zero if x is None else x for x in out], prec)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentSeries":
        if not self.coeffs:
            raise InsufficientPrecision("series is zero to the known precision")
        v = self.valuation
        lead_inv = self.coeffs[0].inverse()
        if self.precision is None and len(self.coeffs) == 1:
            return LaurentSeries(self.field, self.width, -v, [lead_inv], None)
        if self.precision is None:
            raise InsufficientPrecision("inverse of an exact non-monomial series needs a precision")
        rel = self.precision - v
        b = [lead_inv]
        for k in range(1, rel):
            acc = self.field.zero
            for i in range(1, min(k, len(self.coeffs) - 1) + 1):
                if self.coeffs[i]:
                    acc = acc + self.coeffs[i] * b[k - i]
            b.append(-acc * lead_inv)
        return LaurentSeries(self.field, self.width, -v, b, -v + rel)

    def __truediv__(self, other) -> "LaurentSeries":
        if not isinstance(other, LaurentSeries):
            return self * self.field(other).inverse()
        return self * other.inverse()

    def __pow__(self, e: int) -> "LaurentSeries":
        if e < 0:
            return self.inverse() ** (-e)
        result = LaurentSeries.constant(self.field, 1, self.width)
        for _ in range(e):
            result = result * self
        return result

    def truncate(self, prec: int) -> "LaurentSeries":
        if self.precision is not None and prec > self.precision:
            raise InsufficientPrecision("cannot raise precision by truncation")
        return LaurentSeries(self.field, self.width, self.valuation, self.coeffs, prec)

    def galois(self, d: int) -> "LaurentSeries":
        return LaurentSeries(self.field, self.width, self.valuation,
                             [c.galois(d) for c in self.coeffs], self.precision)

    def embed(self, M: int) -> "LaurentSeries":
        F = CycloField(M)
        return LaurentSeries(F, self.width, self.valuation, [embed(c, F.N) for c in self.coeffs], self.precision)

    def to_json(self) -> dict:
        return {"conductor": self.field.N, "width": self.width, "valuation": self.valuation,
                "coeffs": [elem_to_json(c) for c in self.coeffs], "precision": self.precision}

    @classmethod
    def from_json(cls, data: dict, field: CycloField | None = None) -> "LaurentSeries":
        F = field or CycloField(int(data.get("conductor", 1)))
        return cls(F, int(data["width"]), int(data["valuation"]),
                   [elem_from_json(F, c) for c in data["coeffs"]], data.get("precision"))


def series_compose(pi: RatFunc, h: LaurentSeries) -> LaurentSeries:
    """pi(h) to the precision the input supports."""
    if h.field is not pi.field:
        M = _lcm(h.field.N, pi.field.N)
        pi, h = pi.embed(M), h.embed(M)

    def horner(p: Poly) -> LaurentSeries:
        acc = LaurentSeries.constant(h.field, 0, h.width)
        for c in reversed(p.coeffs):
            acc = acc * h + c
        return acc

    num = horner(pi.num)
    den = horner(pi.den)
    return num / den
