"""Roots in K_N, fibers, and the equation pi_tgt = pi_src o g over PGL2(K_N).

Root finding reduces modulo a prime ell of maximal multiplicative order mod N
(so Phi_N has as few factors as possible mod ell), finds roots in the residue
fields with FLINT, Newton-lifts in (Z/ell^k)[x]/Phi_N and reads off integer
coordinates below an a priori bound.  Every candidate is checked exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import flint
import numpy as np

from .cyclotomic import CycloElem, CycloField, cyclotomic_polynomial, multiplicative_order, units_mod
from .errors import BadPrime, DegenerateProbes, NonconstantDegreeOne
from .ratfunc import INF, Mobius, Poly, RatFunc, compose_mobius, evaluate, poly_gcd

log = logging.getLogger(__name__)

__all__ = [
    "FiberPoint",
    "LevelBound",
    "rational_roots",
    "fiber",
    "solve_mobius_equation",
    "aut_group",
    "level_bound",
    "PROBES",
    "set_probe_offset",
]

MAX_PRIMES = 40


def _primes():
    n = 2
    while True:
        if flint.fmpz(n).is_prime():
            yield n
        n += 1


@lru_cache(maxsize=None)
def _good_primes(N: int) -> tuple[int, ...]:
    """Primes not dividing N, those of largest order mod N first."""
    phi = len(units_mod(N)) if N > 1 else 1
    out = []
    for ell in _primes():
        if N % ell == 0:
            continue
        out.append(ell)
        if len(out) >= 4 * MAX_PRIMES:
            break
    order = (lambda l: multiplicative_order(l, N)) if N > 2 else (lambda l: 1)
    # most ell of maximal order, then smaller; stable on ell
    out.sort(key=lambda l: (-order(l), l))
    best = order(out[0])
    return tuple(l for l in out if phi // order(l) <= max(2, phi // best))[:MAX_PRIMES]


@lru_cache(maxsize=None)
def _coord_constant(N: int) -> int:
    """Integer C with |coords| <= C * max_embedding for elements of K_N."""
    F = CycloField(N)
    n = F.degree
    if n == 1:
        return 1
    ks = [k for k in range(1, N) if math.gcd(k, N) == 1]
    V = np.array([[np.exp(2j * np.pi * k * j / N) for j in range(n)] for k in ks])
    Vinv = np.linalg.inv(V)
    c = float(np.max(np.sum(np.abs(Vinv), axis=1)))
    return math.ceil(c * 1.01) + 1


def _integral_monic(f: Poly) -> tuple[list[list[int]], int]:
    """Return (coefficient vectors of g, a) with g(Y) = a^(d-1) f~(Y/a) monic integral,
    f~ a rational multiple of f with integral coordinates and leading integer a."""
    F = f.field
    lc_inv = f.lc.inverse()
    cs = [c * lc_inv for c in f.coeffs]
    den = 1
    for c in cs:
        den = den * c.den // math.gcd(den, c.den)
    ints = [[x * (den // c.den) for x in c.nums] for c in cs]
    d = len(cs) - 1
    a = den
    g = []
    for i, vec in enumerate(ints):
        s = a ** (d - 1 - i) if i < d else 1
        if i == d:
            g.append([1] + [0] * (F.degree - 1))
        else:
            g.append([x * s for x in vec])
    return g, a


def _iroot_ceil(n: int, k: int) -> int:
    """Smallest r >= 0 with r^k >= n."""
    if n <= 1:
        return n
    r = int(flint.fmpz(n).root(k))
    return r if r ** k >= n else r + 1


def _root_size_bound(g: list[list[int]]) -> int:
    """Bound on |y| under every complex embedding, y a root of monic g (Fujiwara)."""
    d = len(g) - 1
    sizes = [sum(abs(x) for x in vec) for vec in g]  # |sigma(c)| <= sum of |coordinates|
    best = 1
    for i in range(1, d + 1):
        c = sizes[d - i]
        if i == d:
            c = (c + 1) // 2
        best = max(best, _iroot_ceil(c, i))
    return 2 * best


def _lift_roots(g: list[list[int]], N: int, ell: int, K: int):
    """Roots of monic g in (Z/ell^K)[x]/Phi_N lifting simple roots mod ell.

    Returns None when g is not squarefree mod ell in some component."""
    phi = cyclotomic_polynomial(N)
    R1 = flint.fmpz_mod_poly_ctx(ell)
    Phi1 = R1(phi)
    comps = [fac for fac, _ in Phi1.factor()[1]]
    comp_roots = []
    for fac in comps:
        Fq = flint.fq_default_ctx(modulus=fac)
        P = flint.fq_default_poly_ctx(Fq)
        gq = P([Fq([x % ell for x in vec]) for vec in g])
        if gq.gcd(gq.derivative()).degree() > 0:
            return None
        comp_roots.append([r.to_list() for r, _ in gq.roots()])
    if any(not rs for rs in comp_roots):
        return []
    # CRT idempotents for the components
    idem = []
    for k, fac in enumerate(comps):
        other = R1([1])
        for j, h in enumerate(comps):
            if j != k:
                other = other * h
        _, s, _ = other.xgcd(fac)
        idem.append((other * s) % Phi1)

    # Newton works componentwise in the product ring, so each component's roots are
    # lifted once (others held at a fixed root) and recombined with lifted idempotents.
    base = [rs[0] for rs in comp_roots]
    precs = [K]
    while precs[-1] > 1:
        precs.append((precs[-1] + 1) // 2)
    precs.reverse()
    ctxs = {k: flint.fmpz_mod_poly_ctx(ell ** k) for k in precs}

    def ev(R, Phi, cs, y):
        acc = R([0])
        for c in reversed(cs):
            acc = (acc * y + c) % Phi
        return acc

    deriv = [[x * i for x in vec] for i, vec in enumerate(g)][1:]
    rings = {}
    for k in precs:
        R = ctxs[k]
        rings[k] = (R, R(phi), [R(v) for v in g], [R(v) for v in deriv])

    def newton(y1):
        R, Phi, _, dk = rings[1]
        _, w, _ = ev(R, Phi, dk, y1).xgcd(Phi)
        y = y1
        for k in precs[1:]:
            R, Phi, gk, dk = rings[k]
            y, w = R(_coeffs(y)), R(_coeffs(w))
            y = (y - ev(R, Phi, gk, y) * w) % Phi
            w = (w * (2 - ev(R, Phi, dk, y) * w)) % Phi
        return y

    def assemble(choice):
        y1 = R1([0])
        for r, e in zip(choice, idem):
            y1 = y1 + R1([int(x) for x in r]) * e
        return y1 % Phi1

    RK = ctxs[K]
    PhiK = RK(phi)
    idemK = []
    for e in idem:
        e = RK(_coeffs(e))
        for _ in precs[1:]:
            e = (3 * e * e - 2 * e * e * e) % PhiK
        idemK.append(e)
    lifted = []
    for k, rs in enumerate(comp_roots):
        row = []
        for r in rs:
            choice = list(base)
            choice[k] = r
            y = RK(_coeffs(newton(assemble(choice))))
            row.append((y * idemK[k]) % PhiK)
        lifted.append(row)
    out = []
    for combo in product(*lifted):
        y = RK([0])
        for part in combo:
            y = y + part
        out.append(y % PhiK)
    return out


def _coeffs(p) -> list[int]:
    return [int(c) for c in p.coeffs()]


def rational_roots(f: Poly) -> list[CycloElem]:
    """All roots of f lying in its coefficient field K_N, sorted canonically."""
    if f.is_zero():
        raise ValueError("zero polynomial has every element as a root")
    F = f.field
    if f.degree <= 0:
        return []
    if f.degree == 1:
        return [-f.coeffs[0] / f.coeffs[1]]
    N = F.N
    work = f
    roots = None
    for attempt, ell in enumerate(_good_primes(N)):
        if attempt == 3 and work is f:
            # repeated factors persist across primes: pass to the squarefree part
            work = f // poly_gcd(f, f.derivative())
            if work.degree <= 1:
                return rational_roots(work) if work.degree == 1 else []
        g, a = _integral_monic(work)
        bound = _coord_constant(N) * _root_size_bound(g)
        K = 1
        while ell ** K <= (2 * bound + 1) << 20:
            K += 1
        lifted = _lift_roots(g, N, ell, K)
        if lifted is None:
            log.debug("ell=%d: not squarefree modulo ell", ell)
            continue
        mod = ell ** K
        roots = []
        for y in lifted:
            cs = _coeffs(y)
            cs += [0] * (F.degree - len(cs))
            cs = [c - mod if c > mod // 2 else c for c in cs]
            if max(abs(c) for c in cs) > bound:
                continue
            r = F._from_long(cs, a)
            if not f(r):
                roots.append(r)
        break
    if roots is None:
        raise BadPrime(f"no suitable prime found for a degree {f.degree} polynomial over K_{N}")
    return sorted(set(roots), key=lambda r: (r.den, r.nums))


@dataclass(frozen=True)
class FiberPoint:
    value: object  # CycloElem or INF
    multiplicity: int


def _multiplicity(P: Poly, r: CycloElem) -> int:
    F = P.field
    lin = Poly(F, [-r, F.one])
    m = 0
    while P.degree >= 1:
        q, rem = P.divmod(lin)
        if rem:
            break
        P = q
        m += 1
    return m


def fiber(pi: RatFunc, y) -> list[FiberPoint]:
    """K_N-rational points of pi^{-1}(y), including INF."""
    if pi.degree < 1:
        raise ValueError("fiber of a constant function")
    F = pi.field
    if y is INF:
        P = pi.den
        inf_mult = pi.num.degree - pi.den.degree
    else:
        y = F(y)
        P = pi.num - pi.den * y
        inf_mult = pi.degree - P.degree if evaluate(pi, INF) == y else 0
    out = []
    if P.degree >= 1:
        for r in rational_roots(P):
            out.append(FiberPoint(r, _multiplicity(P, r)))
    if inf_mult > 0:
        out.append(FiberPoint(INF, inf_mult))
    return out


# deterministic probe sequence of small rationals
PROBES = tuple(
    Fraction(x)
    for x in [1, 2, 3, -1, Fraction(1, 2), -2, 5, Fraction(1, 3), -3, 7, Fraction(2, 3), Fraction(-1, 2),
              11, Fraction(3, 2), -5, 13, Fraction(1, 5), Fraction(-2, 3), 17, Fraction(5, 2),
              19, Fraction(-1, 3), 23, Fraction(3, 5), -7, 29, Fraction(7, 3), Fraction(-5, 2)]
)


_probe_offset = 0


def set_probe_offset(k: int) -> None:
    """Rotate the probe sequence; the solution sets do not depend on it."""
    global _probe_offset
    _probe_offset = int(k) % len(PROBES)


def _probe_sequence():
    return PROBES[_probe_offset:] + PROBES[:_probe_offset]


def _proj(F: CycloField, s):
    return (F.one, F.zero) if s is INF else (s, F.one)


def _interpolate(F: CycloField, taus, ss) -> Mobius | None:
    """Projective map sending taus[i] to ss[i]; None when ss are not distinct."""

    def frame(pts):
        P1, P2, P3 = (_proj(F, s) for s in pts)
        d32 = P3[0] * P2[1] - P3[1] * P2[0]
        d13 = P1[0] * P3[1] - P1[1] * P3[0]
        return ((d32 * P1[0], d13 * P2[0]), (d32 * P1[1], d13 * P2[1]))

    T = frame(ss)
    U = frame(taus)
    (a, b), (c, d) = T
    (e, f), (g, h) = U
    # T * adj(U)
    m = (a * h - b * g, -a * f + b * e, c * h - d * g, -c * f + d * e)
    if not (m[0] * m[3] - m[1] * m[2]):
        return None
    return Mobius(*m, field=F)


def _choose_probes(src: RatFunc, tgt: RatFunc, count: int):
    """Probe triples (tau, tgt(tau), fiber of src); None once a fiber is empty,
    since any solution g sends tau into that fiber."""
    F = src.field
    clean, fallback = [], []
    for x in _probe_sequence():
        tau = F(x)
        y = evaluate(tgt, tau)
        fib = fiber(src, y)
        if not fib:
            log.debug("empty fiber over tgt(%s): no solutions", x)
            return None
        entry = (tau, y, fib)
        if all(p.multiplicity == 1 for p in fib) and y is not INF:
            clean.append(entry)
        else:
            fallback.append(entry)
        if len(clean) >= count:
            return clean
    picked = clean + fallback[: count - len(clean)]
    if len(picked) < count:
        raise DegenerateProbes("probe sequence exhausted")
    return picked


def solve_mobius_equation(pi_src: RatFunc, pi_tgt: RatFunc, ambient: CycloField) -> list[Mobius]:
    """All g in PGL2(ambient) with pi_src o g = pi_tgt."""
    if pi_src.degree != pi_tgt.degree or pi_src.degree < 1:
        return []
    src = pi_src.embed(ambient.N) if pi_src.field is not ambient else pi_src
    tgt = pi_tgt.embed(ambient.N) if pi_tgt.field is not ambient else pi_tgt
    F = ambient
    if src.degree == 1:
        # the unique solution is src^{-1} o tgt
        a0, a1 = (src.num.coeffs + (F.zero,) * 2)[:2]
        b0, b1 = (src.den.coeffs + (F.zero,) * 2)[:2]
        c0, c1 = (tgt.num.coeffs + (F.zero,) * 2)[:2]
        d0, d1 = (tgt.den.coeffs + (F.zero,) * 2)[:2]
        # src = (a1 t + a0)/(b1 t + b0); inverse matrix adj
        inv = Mobius(b0, -a0, -b1, a1, field=F)
        g = inv * Mobius(c1, c0, d1, d0, field=F)
        return [g]
    probes = _choose_probes(src, tgt, 5)
    if probes is None:
        return []
    (t1, _, f1), (t2, _, f2), (t3, _, f3) = probes[:3]
    extra = probes[3:]
    found = set()
    for s1, s2, s3 in product(f1, f2, f3):
        vals = (s1.value, s2.value, s3.value)
        if len({(_key(v)) for v in vals}) < 3:
            continue
        g = _interpolate(F, (t1, t2, t3), vals)
        if g is None:
            continue
        ok = True
        for tau, y, _ in extra:
            try:
                if evaluate(src, g(tau)) != y:
                    ok = False
                    break
            except Exception:
                ok = False
                break
        if ok:
            ok = compose_mobius(src, g) == tgt
        log.debug("candidate %s -> %s", g, "accept" if ok else "reject")
        if ok:
            found.add(g)
    return sorted(found, key=Mobius.sort_key)


def _key(v):
    return ("inf",) if v is INF else (v.den, v.nums)


def aut_group(pi: RatFunc, ambient: CycloField) -> list[Mobius]:
    """Aut(pi) over the ambient field: all g with pi o g = pi."""
    if pi.degree == 1:
        raise NonconstantDegreeOne("a degree-one map has an infinite automorphism group")
    if pi.degree < 1:
        raise ValueError("constant map")
    group = solve_mobius_equation(pi, pi, ambient)
    S = set(group)
    assert Mobius.identity(ambient) in S
    for g in group:
        assert g.inverse() in S
        for h in group:
            assert g * h in S
    return group


@dataclass(frozen=True)
class LevelBound:
    b: int
    p: int


def _p_part(n: int, p: int) -> int:
    out = 1
    while n % p == 0:
        n //= p
        out *= p
    return out


def level_bound(aut: list[Mobius], p: int) -> LevelBound:
    b = 1
    for g in aut:
        b = math.lcm(b, _p_part(g.order(), p))
    return LevelBound(b, p)
