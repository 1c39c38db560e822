"""Galois groups of cyclotomic extensions, PGL2 cocycles and their trivialization.

Galois groups are subgroups of (Z/MZ)^*, with sigma_d acting by zeta -> zeta^d.
A PGL2 cocycle obeys z(st) = z(s) * s(z(t)); it is a coboundary when
z(s) = A^-1 s(A) for a single A.  Two routes produce such an A:

* ``cyclic-norm``: lift z to GL2, read off the scalar 2-cocycle mu, solve a
  norm equation to split mu (Preu's formula), then apply Hilbert 90 in GL2.
  It needs a cyclic group; otherwise it climbs K c K_E c K_M with both steps
  cyclic, when such a cyclotomic K_E exists;
* ``conic``: Hilbert 90 in GL3 through phi, then a point on the resulting conic.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .cyclotomic import (
    CycloElem,
    CycloField,
    SubfieldSpec,
    abelian_basis,
    descend,
    multiplicative_order,
    relative_norm,
)
from .errors import InvalidCocycle, NormMismatch, NotASubfield, ProjectionRankDeficient
from .linalg import Matrix, is_scalar_multiple, mat_galois, mat_inv, mat_mul, mat_vec, rank
from .ratfunc import Mobius, RatFunc, compose_mobius
from .solver import LevelBound, rational_roots, solve_mobius_equation

log = logging.getLogger(__name__)

__all__ = [
    "GalGroup",
    "Cocycle",
    "MatrixCocycle",
    "TwoCocycle",
    "NotFound",
    "Obstruction",
    "galois_group",
    "enumerate_cocycles",
    "hilbert90",
    "lift_and_mu",
    "solve_norm_equation",
    "preu_f",
    "trivialize_cocycle",
    "coboundary",
    "is_coboundary_of",
]


# ---------------------------------------------------------------------------
# Galois groups


class GalGroup:
    """Gal(K_M/K) as the subgroup of (Z/MZ)^* fixing K."""

    def __init__(self, M: int, elements: Iterable[int]):
        self.field = CycloField(M)
        self.M = self.field.N
        self.elements = tuple(sorted(set(int(e) % max(self.M, 1) if self.M > 1 else 1 for e in elements)))
        self.generators = tuple(abelian_basis(self.elements, self.M)) if len(self.elements) > 1 else ()
        self.orders = tuple(multiplicative_order(g, self.M) for g in self.generators)
        self._normal: dict[int, tuple[int, ...]] = {}
        for exps in itertools.product(*(range(o) for o in self.orders)):
            d = 1 % self.M if self.M > 1 else 1
            for g, e in zip(self.generators, exps):
                d = d * pow(g, e, self.M) % self.M if self.M > 1 else 1
            self._normal[d] = exps
        if len(self._normal) != len(self.elements):
            raise ValueError("generators do not give normal forms for every element")

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> int:
        return 1 % self.M if self.M > 1 else 1

    def mul(self, a: int, b: int) -> int:
        return a * b % self.M if self.M > 1 else 1

    def inv(self, a: int) -> int:
        return pow(a, -1, self.M) if self.M > 1 else 1

    def normal_form(self, d: int) -> tuple[int, ...]:
        return self._normal[d % self.M if self.M > 1 else 1]

    def is_cyclic(self) -> bool:
        return len(self.generators) <= 1

    def generator(self) -> int:
        if not self.is_cyclic():
            raise ValueError("group is not cyclic")
        return self.generators[0] if self.generators else self.identity

    def powers(self) -> list[int]:
        """[s^0, s^1, ..., s^(n-1)] for the cyclic generator s."""
        s = self.generator()
        out = [self.identity]
        for _ in range(self.order - 1):
            out.append(self.mul(out[-1], s))
        return out

    def fixed_field(self) -> SubfieldSpec:
        return SubfieldSpec(self.M, self.elements)

    def __eq__(self, other) -> bool:
        return isinstance(other, GalGroup) and (self.M, self.elements) == (other.M, other.elements)

    def __hash__(self) -> int:
        return hash((self.M, self.elements))

    def __repr__(self) -> str:
        return f"GalGroup(M={self.M}, gens={list(self.generators)}, orders={list(self.orders)})"


def galois_group(M: int, K: SubfieldSpec) -> GalGroup:
    """Gal(K_M/K) for K a subfield of K_M."""
    cond = K.conductor
    if M % cond:
        raise NotASubfield(f"K has conductor {cond}, which does not divide {M}")
    if M <= 2:
        return GalGroup(M, [1])
    return GalGroup(M, K.restrict_to(M).elements)


# ---------------------------------------------------------------------------
# cocycles


@dataclass
class Cocycle:
    group: GalGroup
    values: dict  # d -> Mobius

    def __call__(self, d: int) -> Mobius:
        return self.values[d % self.group.M if self.group.M > 1 else 1]

    def check(self) -> bool:
        G = self.group
        for s in G.elements:
            for t in G.elements:
                if self(G.mul(s, t)) != self(s) * self(t).galois(s):
                    return False
        return self(G.identity).is_identity()

    def is_trivial(self) -> bool:
        return all(v.is_identity() for v in self.values.values())

    def sort_key(self) -> tuple:
        return tuple(self.values[d].sort_key() for d in self.group.elements)

    def to_json(self) -> dict:
        G = self.group
        return {
            "conductor": G.M,
            "fixed_subgroup": list(G.elements),
            "values": {str(d): self.values[d].to_json() for d in G.elements},
        }

    @classmethod
    def from_json(cls, data: dict) -> "Cocycle":
        G = GalGroup(int(data["conductor"]), data["fixed_subgroup"])
        F = G.field
        return cls(G, {int(d): Mobius.from_json(F, v) for d, v in data["values"].items()})


@dataclass
class MatrixCocycle:
    group: GalGroup
    values: dict  # d -> Matrix

    def __call__(self, d: int) -> Matrix:
        return self.values[d % self.group.M if self.group.M > 1 else 1]

    @property
    def size(self) -> int:
        return len(next(iter(self.values.values())))

    def check(self) -> bool:
        G = self.group
        return all(
            self(G.mul(s, t)) == mat_mul(self(s), mat_galois(self(t), s))
            for s in G.elements
            for t in G.elements
        )


@dataclass
class TwoCocycle:
    group: GalGroup
    table: dict  # (d, e) -> CycloElem

    def __call__(self, s: int, t: int) -> CycloElem:
        return self.table[(s, t)]

    def check(self, triples: Iterable | None = None) -> bool:
        G = self.group
        if triples is None:
            triples = itertools.product(G.elements, repeat=3)
        for s1, s2, s3 in triples:
            lhs = self(s2, s3).galois(s1) * self(s1, G.mul(s2, s3))
            rhs = self(G.mul(s1, s2), s3) * self(s1, s2)
            if lhs != rhs:
                return False
        return True


def coboundary(A: Mobius, G: GalGroup) -> Cocycle:
    """The cocycle s -> A^-1 s(A)."""
    Ainv = A.inverse()
    return Cocycle(G, {d: Ainv * A.galois(d) for d in G.elements})


def is_coboundary_of(A: Mobius, z: Cocycle) -> bool:
    Ainv = A.inverse()
    return all(z(d) == Ainv * A.galois(d) for d in z.group.elements)


def _extend(G: GalGroup, gen_values: Sequence[Mobius]) -> dict | None:
    """Extend generator values to all of G along normal forms; None if a relation fails."""
    F = G.field
    ident = Mobius.identity(F)
    # powers of each generator: z(g^k) = z(g) g(z(g^(k-1)))
    pow_vals = []
    for g, o, zg in zip(G.generators, G.orders, gen_values):
        vals = [ident]
        for k in range(1, o + 1):
            vals.append(zg * vals[-1].galois(g))
        if not vals[o].is_identity():
            return None
        pow_vals.append(vals[:o])
    values = {}
    for d, exps in G._normal.items():
        # z(g1^a * rest) = z(g1^a) g1^a(z(rest)), built from the last generator back
        z = ident
        rest = G.identity
        for idx in range(len(exps) - 1, -1, -1):
            g, e = G.generators[idx], exps[idx]
            ge = pow(g, e, G.M)
            z = pow_vals[idx][e] * z.galois(ge)
            rest = G.mul(ge, rest)
        values[d] = z
    return values


def enumerate_cocycles(pi: RatFunc, K: SubfieldSpec, b: LevelBound | int = 1, level: int | None = None) -> list[Cocycle]:
    """All cocycles Gal(K_M/K) -> PGL2(K_M), M = b * level, compatible with pi.

    Compatibility means s(pi) = pi o z(s) for every s.
    """
    bval = b.b if isinstance(b, LevelBound) else int(b)
    level = level or pi.field.N
    M = bval * level
    G = galois_group(M, K)
    F = G.field
    pi_M = pi.embed(M) if pi.field is not F else pi
    choices = []
    for g in G.generators:
        sols = solve_mobius_equation(pi_M, pi_M.galois(g), F)
        log.debug("generator %d: %d solutions", g, len(sols))
        if not sols:
            return []
        choices.append(sols)
    out = []
    for combo in itertools.product(*choices):
        values = _extend(G, combo)
        if values is None:
            continue
        z = Cocycle(G, values)
        if not z.check():
            continue
        if all(pi_M.galois(d) == compose_mobius(pi_M, values[d]) for d in G.elements):
            out.append(z)
    out.sort(key=Cocycle.sort_key)
    return out


# ---------------------------------------------------------------------------
# Hilbert 90


def hilbert90(psi: MatrixCocycle, K: SubfieldSpec | None = None) -> Matrix:
    """A with psi(s) = A^-1 s(A) for every s, by averaging the twisted action."""
    G = psi.group
    F = G.field
    n = psi.size
    inv_order = F(Fraction(1, G.order))
    cols: list[tuple[CycloElem, ...]] = []
    for k in range(F.degree):
        beta = F.zeta(k)
        for i in range(n):
            v = [F.zero] * n
            v[i] = beta
            acc = [F.zero] * n
            for s in G.elements:
                w = mat_vec(psi(s), [x.galois(s) for x in v])
                acc = [a + b for a, b in zip(acc, w)]
            w = tuple(a * inv_order for a in acc)
            if any(w) and rank(cols + [w]) > len(cols):
                cols.append(w)
                if len(cols) == n:
                    break
        if len(cols) == n:
            break
    if len(cols) < n:
        raise ProjectionRankDeficient(f"only {len(cols)} independent fixed vectors for n={n}")
    W = tuple(tuple(cols[j][i] for j in range(n)) for i in range(n))
    A = mat_inv(W)
    for s in G.elements:
        if mat_mul(W, mat_inv(mat_galois(W, s))) != psi(s):
            raise ProjectionRankDeficient("averaged basis does not trivialize the cocycle")
    return A


# ---------------------------------------------------------------------------
# the scalar 2-cocycle


def _lift(g: Mobius) -> Matrix:
    return g.matrix()


def lift_and_mu(z: Cocycle, full_check_limit: int = 16) -> tuple[MatrixCocycle, TwoCocycle]:
    """Canonical GL2 lift (first nonzero entry 1) and its scalar defect mu."""
    G = z.group
    lift = MatrixCocycle(G, {d: _lift(z(d)) for d in G.elements})
    table = {}
    for s in G.elements:
        for t in G.elements:
            lhs = mat_mul(lift(s), mat_galois(lift(t), s))
            c = is_scalar_multiple(lhs, lift(G.mul(s, t)))
            if c is None:
                raise InvalidCocycle(f"cocycle law fails at ({s}, {t})")
            table[(s, t)] = c
    mu = TwoCocycle(G, table)
    if G.order <= full_check_limit:
        ok = mu.check()
    else:
        els = G.elements
        ok = mu.check((els[i % len(els)], els[(3 * i + 1) % len(els)], els[(7 * i + 2) % len(els)])
                      for i in range(4 * len(els)))
    assert ok, "mu violates the 2-cocycle identity"
    return lift, mu


# ---------------------------------------------------------------------------
# norm equations and Preu's formula


@dataclass(frozen=True)
class NotFound:
    """Inconclusive outcome of a bounded search."""

    reason: str
    tried: int = 0


def _l1_sphere(n: int, h: int):
    """Integer vectors of length n with L1 norm exactly h, deterministic order."""
    if n == 0:
        if h == 0:
            yield ()
        return
    for first in range(0, h + 1):
        for rest in _l1_sphere(n - 1, h - first):
            if first == 0:
                yield (0,) + rest
            else:
                yield (first,) + rest
                yield (-first,) + rest


def _nth_roots_in(F: CycloField, c: CycloElem, n: int) -> list[CycloElem]:
    from .ratfunc import Poly

    coeffs = [-c] + [F.zero] * (n - 1) + [F.one]
    return rational_roots(Poly(F, coeffs))


def solve_norm_equation(target: CycloElem, G: GalGroup, bound: int = 3, hints: Sequence[CycloElem] = ()):
    """a with prod_{s in G} s(a) = target, or NotFound.

    Candidates are u * c with u from a structured list (hints and their powers,
    1 - zeta^i products, small power-basis vectors) and c any n-th root of
    target / N(u) lying in the fixed field (so that N(c) = c^n).
    """
    F = G.field
    target = F(target)
    if not target:
        raise ValueError("norm target must be nonzero")
    n = G.order
    els = G.elements
    K = G.fixed_field()
    if n == 1:
        return target

    def norm(x):
        return relative_norm(x, els)

    tried = 0
    seen = set()

    def attempt(u):
        nonlocal tried
        if not u or u in seen:
            return None
        seen.add(u)
        tried += 1
        nu = norm(u)
        if nu == target:
            return u
        q = target / nu
        for c in _nth_roots_in(F, q, n):
            if K.contains(c):
                a = u * c
                if norm(a) == target:
                    return a
        return None

    def structured():
        yield F.one
        for h in hints:
            for k in range(1, n):
                yield h ** k
                yield h ** (-k)
        for i in range(1, max(F.N, 2)):
            yield 1 - F.zeta(i)
        for i in range(1, max(F.N, 2)):
            for j in range(i, max(F.N, 2)):
                yield (1 - F.zeta(i)) * (1 - F.zeta(j))

    for u in structured():
        a = attempt(u)
        if a is not None:
            return a
    if n == 2:
        a = _norm_equation_quadratic(target, G, bound)
        if a is not None:
            return a
    for h in range(1, bound + 1):
        for vec in _l1_sphere(F.degree, h):
            u = F._from_long(list(vec))
            a = attempt(u)
            if a is not None:
                return a
            for hint in hints:
                a = attempt(u * hint)
                if a is not None:
                    return a
    return NotFound(f"no solution with height <= {bound}", tried)


def _norm_equation_quadratic(target: CycloElem, G: GalGroup, bound: int):
    """Solve a s(a) = target for G = {1, s} through the conic x^2 - d y^2 = target z^2.

    Here L = K(w) with s(w) = -w and d = w^2 in K; a point gives a = (x + y w) / z.
    Over K = Q the conic is decided exactly; otherwise a short bounded K-point search runs.
    """
    from . import conic as conic_mod

    F = G.field
    s = next(e for e in G.elements if e != G.identity)
    K = G.fixed_field()
    w = next((v - v.galois(s) for v in (F.zeta(k) for k in range(1, max(F.N, 2))) if v != v.galois(s)), None)
    if w is None:
        return None
    d = w * w
    gram = tuple(tuple(c if i == j else F.zero for j in range(3)) for i, c in enumerate((F.one, -d, -target)))
    form = conic_mod.ConicForm(gram, K)
    if K.is_rational():
        pt = conic_mod.has_point_over_Q(form)
    else:
        # the search cost grows like budget^(2 [K:Q]); keep it small above quadratic K
        pt = conic_mod.search_point_over_K(form, K, min(bound, 2 if K.degree <= 2 else 1))
    if not isinstance(pt, conic_mod.ConicPoint):
        return None
    x, y, z = (F(c) for c in pt.coords)
    if not z:
        return None
    a = (x + y * w) / z
    return a if a * a.galois(s) == target else None


def _mu_product(mu: TwoCocycle, G: GalGroup) -> CycloElem:
    s = G.generator()
    acc = G.field.one
    for sj in G.powers():
        acc = acc * mu(sj, s)
    return acc


def preu_f(mu: TwoCocycle, G: GalGroup, a: CycloElem) -> dict:
    """f with mu(s, t) = f(s) s(f(t)) f(st)^-1, for cyclic G and N(a) = (prod_j mu(s^j, s))^-1."""
    F = G.field
    a = F(a)
    s = G.generator()
    pw = G.powers()
    n = G.order
    if relative_norm(a, G.elements) * _mu_product(mu, G) != 1:
        raise NormMismatch("norm of a does not invert the product of mu(s^j, s)")
    f = {}
    acc = F.one  # prod_{j<i} mu(s^j, s) s^j(a)
    for i in range(1, n + 1):
        sj = pw[i - 1]
        acc = acc * mu(sj, s) * a.galois(sj)
        si = pw[i % n]
        f[si] = mu(si, G.identity) / acc
    for x in G.elements:
        for y in G.elements:
            if f[x] * f[y].galois(x) / f[G.mul(x, y)] != mu(x, y):
                raise NormMismatch(f"split of mu fails at ({x}, {y})")
    return f


# ---------------------------------------------------------------------------
# trivialization


@dataclass
class Obstruction:
    """A cocycle the requested route could not trivialize."""

    route: str
    reason: str
    conic: object = None
    witness: object = None

    def to_json(self) -> dict:
        out = {"route": self.route, "reason": self.reason}
        if self.conic is not None:
            out["conic"] = self.conic.to_json()
        if self.witness is not None:
            out["witness"] = self.witness if isinstance(self.witness, (int, str)) else str(self.witness)
        return out


def _cyclic_tower(G: GalGroup):
    """A conductor E with K inside K_E, Gal(K_M/K_E) and Gal(K_E/K) both cyclic, or None."""
    M = G.M
    K = G.fixed_field()
    for E in sorted(e for e in range(1, M) if M % e == 0 and e % K.conductor == 0 and e > 2):
        top = GalGroup(M, [d for d in G.elements if d % E == 1 % E])
        bottom = galois_group(E, K)
        if top.is_cyclic() and bottom.is_cyclic() and top.order * bottom.order == G.order:
            return E, top, bottom
    return None


def _route_norm_tower(z: Cocycle, budget: int):
    """Trivialize over Gal(K_M/K_E) first, then the remaining cocycle over Gal(K_E/K)."""
    G = z.group
    tower = _cyclic_tower(G)
    if tower is None:
        return Obstruction("cyclic-norm", "Galois group is not cyclic and has no cyclic tower")
    E, top, bottom = tower
    B = _route_norm(Cocycle(top, {h: z(h) for h in top.elements}), budget)
    if isinstance(B, Obstruction):
        return B
    # z'(s) = B z(s) s(B)^-1 is trivial on the top group, so it is defined over K_E
    FE = CycloField(E)
    values = {}
    for d in bottom.elements:
        s = next(g for g in G.elements if g % E == d)
        w = B * z(s) * B.galois(s).inverse()
        values[d] = Mobius(*(descend(x, E) for x in w.entries), field=FE)
    C = _route_norm(Cocycle(bottom, values), budget)
    if isinstance(C, Obstruction):
        return C
    return C.embed(G.M) * B


def _route_norm(z: Cocycle, budget: int):
    G = z.group
    if not G.is_cyclic():
        return _route_norm_tower(z, budget)
    if G.order == 1:
        return Mobius.identity(G.field)
    lift, mu = lift_and_mu(z)
    s = G.generator()
    target = _mu_product(mu, G).inverse()
    delta = (lambda m: m[0][0] * m[1][1] - m[0][1] * m[1][0])(lift(s))
    n = G.order
    if n % 2 == 1:
        # mu^2 is the coboundary of det, so target^2 = N(delta)^-1 and this has norm target
        a = target * delta ** ((n - 1) // 2)
        if relative_norm(a, G.elements) != target:
            a = solve_norm_equation(target, G, budget, hints=[delta])
    else:
        a = solve_norm_equation(target, G, budget, hints=[delta])
    if isinstance(a, NotFound):
        return Obstruction("cyclic-norm", "norm equation unsolved: " + a.reason, witness=a.tried)
    f = preu_f(mu, G, a)
    phi_vals = {}
    for d in G.elements:
        c = f[d].inverse()
        phi_vals[d] = tuple(tuple(x * c for x in row) for row in lift(d))
    psi = MatrixCocycle(G, phi_vals)
    A = hilbert90(psi)
    return Mobius.from_matrix(A)


def _route_conic(z: Cocycle, budget: int):
    from . import conic as conic_mod

    G = z.group
    K = G.fixed_field()
    Q, M = conic_mod.conic_from_cocycle(z, K)
    if K.is_rational():
        pt = conic_mod.has_point_over_Q(Q)
    else:
        pt = conic_mod.search_point_over_K(Q, K, budget)
    if not isinstance(pt, conic_mod.ConicPoint):
        witness = getattr(pt, "place", None)
        return Obstruction("conic", getattr(pt, "reason", "no point found"), conic=Q, witness=witness)
    return conic_mod.trivializer_from_point(M, pt, z)


def trivialize_cocycle(z: Cocycle, route: str = "cyclic-norm", budget: int | None = None):
    """A with z(s) = A^-1 s(A) for all s, or an Obstruction."""
    if not z.check():
        raise InvalidCocycle("cocycle law fails")
    if z.is_trivial():
        return Mobius.identity(z.group.field)
    if route in ("cyclic-norm", "norm"):
        res = _route_norm(z, budget if budget is not None else 3)
    elif route == "conic":
        res = _route_conic(z, budget if budget is not None else 6)
    else:
        raise ValueError(f"unknown route {route!r}")
    if isinstance(res, Mobius) and not is_coboundary_of(res, z):
        raise AssertionError(f"route {route} returned a matrix that does not trivialize the cocycle")
    return res
