"""Conics attached to PGL2 cocycles.

phi sends PGL2 into the orthogonal group of Q0 = y^2 - xz: it is the action of
g on binary quadratic forms, normalized to determinant one.  Twisting Q0 by a
cocycle gives a conic C over K, and points of C(K) are the same thing as
trivializations of the cocycle.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction

import flint
import numpy as np

from .cyclotomic import CycloElem, CycloField, SubfieldSpec, is_in_subfield
from .errors import ConventionMismatch, SingularMatrix
from .linalg import Matrix, identity, mat_det, mat_galois, mat_inv, mat_mul, mat_vec, transpose
from .ratfunc import INF, Mobius, Poly, elem_from_json, elem_to_json
from .solver import _interpolate, rational_roots

log = logging.getLogger(__name__)

__all__ = [
    "ConicForm",
    "ConicPoint",
    "NoPoint",
    "Inconclusive",
    "phi",
    "q0_gram",
    "conic_from_cocycle",
    "diagonalize",
    "has_point_over_Q",
    "search_point_over_K",
    "trivializer_from_point",
]


def q0_gram(F: CycloField) -> Matrix:
    h = F(Fraction(-1, 2))
    z = F.zero
    return ((z, z, h), (z, F.one, z), (h, z, z))


@dataclass(frozen=True)
class ConicForm:
    gram: Matrix
    K: SubfieldSpec

    def __post_init__(self):
        G = self.gram
        if any(G[i][j] != G[j][i] for i in range(3) for j in range(3)):
            raise ValueError("gram matrix is not symmetric")
        if not mat_det(G):
            raise SingularMatrix("degenerate conic")
        for row in G:
            for x in row:
                if not is_in_subfield(x, self.K):
                    raise ValueError(f"coefficient {x!r} is not in K")

    @property
    def field(self) -> CycloField:
        return self.gram[0][0].field

    def __call__(self, v) -> CycloElem:
        return bilinear(self.gram, v, v)

    def to_json(self) -> dict:
        return {"gram": [[elem_to_json(x) for x in row] for row in self.gram], "field": self.K.to_json(),
                "conductor": self.field.N}

    @classmethod
    def from_json(cls, data: dict) -> "ConicForm":
        K = SubfieldSpec.from_json(data["field"])
        F = CycloField(int(data.get("conductor", K.N)))
        gram = tuple(tuple(elem_from_json(F, x) for x in row) for row in data["gram"])
        return cls(gram, K.restrict_to(F.N))


@dataclass(frozen=True)
class ConicPoint:
    coords: tuple


@dataclass(frozen=True)
class NoPoint:
    """Certified absence of rational points: the place where the form is anisotropic."""

    place: object  # "inf" or a prime
    reason: str = "locally insoluble"


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    budget: int


def bilinear(G: Matrix, u, v) -> CycloElem:
    return sum((G[i][j] * u[i] * v[j] for i in range(3) for j in range(3) if G[i][j]), u[0].field.zero)


def phi(g: Mobius) -> Matrix:
    """Image of g in SO(Q0): the action on (u^2, uv, v^2) divided by det g."""
    a, b, c, d = g.entries
    det = a * d - b * c
    if not det:
        raise SingularMatrix("Mobius matrix has zero determinant")
    inv = det.inverse()
    rows = ((a * a, 2 * a * b, b * b), (a * c, a * d + b * c, b * d), (c * c, 2 * c * d, d * d))
    return tuple(tuple(x * inv for x in row) for row in rows)


def conic_from_cocycle(z, K: SubfieldSpec):
    """(C, M) with phi(z(s)) = M^-1 s(M) and C given by Q0(M^-1 x)."""
    from .cohomology import MatrixCocycle, hilbert90

    G = z.group
    F = G.field
    psi = MatrixCocycle(G, {d: phi(z(d)) for d in G.elements})
    M = hilbert90(psi)
    Minv = mat_inv(M)
    gram = mat_mul(mat_mul(transpose(Minv), q0_gram(F)), Minv)
    KM = K.restrict_to(F.N)
    for d in KM.generators:
        assert mat_galois(gram, d) == gram, "conic coefficients are not fixed by the Galois group"
    return ConicForm(gram, KM), M


def diagonalize(Q: ConicForm) -> tuple[tuple[CycloElem, CycloElem, CycloElem], Matrix]:
    """(diag, T) with T^t gram T = diag(diag), T invertible with entries in K."""
    F = Q.field
    G = [list(r) for r in Q.gram]
    T = [list(r) for r in identity(F, 3)]
    n = 3

    def col_op(j, i, c):
        # column j += c * column i, and the matching row operation on G
        for r in range(n):
            T[r][j] = T[r][j] + c * T[r][i]
        for r in range(n):
            G[r][j] = G[r][j] + c * G[r][i]
        for r in range(n):
            G[j][r] = G[j][r] + c * G[i][r]

    for i in range(n):
        if not G[i][i]:
            j = next((j for j in range(i + 1, n) if G[i][j]), None)
            if j is None:
                continue
            if G[j][j]:
                # swap roles of i and j
                for r in range(n):
                    T[r][i], T[r][j] = T[r][j], T[r][i]
                G[i], G[j] = G[j], G[i]
                for r in range(n):
                    G[r][i], G[r][j] = G[r][j], G[r][i]
            else:
                col_op(i, j, F.one)
                if not G[i][i]:
                    col_op(i, j, F(-2))
        p = G[i][i]
        if not p:
            continue
        pinv = p.inverse()
        for j in range(i + 1, n):
            if G[i][j]:
                col_op(j, i, -G[i][j] * pinv)
    diag = (G[0][0], G[1][1], G[2][2])
    Tm = tuple(tuple(r) for r in T)
    assert mat_mul(mat_mul(transpose(Tm), Q.gram), Tm) == tuple(
        tuple(diag[i] if i == j else F.zero for j in range(3)) for i in range(3)
    )
    return diag, Tm


# ---------------------------------------------------------------------------
# over Q


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * m with m squarefree; returns (m, s)."""
    if n == 0:
        return 0, 1
    sign = -1 if n < 0 else 1
    m, s = 1, 1
    for p, e in flint.fmpz(abs(n)).factor():
        p = int(p)
        s *= p ** (e // 2)
        if e % 2:
            m *= p
    return sign * m, s


def _is_qr(a: int, n: int) -> bool:
    """a is a square modulo every prime factor of squarefree n."""
    n = abs(n)
    if n == 1:
        return True
    for p, _ in flint.fmpz(n).factor():
        p = int(p)
        r = a % p
        if r and p > 2 and pow(r, (p - 1) // 2, p) != 1:
            return False
    return True


def _legendre_normal(coeffs):
    """Reduce rational diagonal coefficients to squarefree pairwise coprime integers.

    Returns (a, b, c, mult): a solution (X, Y, Z) of the reduced equation gives
    the solution (X * mult[0], Y * mult[1], Z * mult[2]) of the original one."""
    mult = [Fraction(1)] * 3
    ints = []
    for i, q in enumerate(coeffs):
        q = Fraction(q)
        # q x^2 = (num * den) (x / den)^2
        ints.append(q.numerator * q.denominator)
        mult[i] = Fraction(q.denominator)
    for i in range(3):
        m, s = _squarefree_split(ints[i])
        ints[i] = m
        mult[i] /= s
    changed = True
    while changed:
        changed = False
        for i, j in ((0, 1), (0, 2), (1, 2)):
            g = math.gcd(ints[i], ints[j])
            if g > 1:
                k = 3 - i - j
                # g (a X^2 + b Y^2) + c Z^2 = 0  ->  a (gX)^2 + b (gY)^2 + g c Z^2 = 0
                ints[i] //= g
                ints[j] //= g
                mult[i] /= g
                mult[j] /= g
                m, s = _squarefree_split(ints[k] * g)
                ints[k] = m
                mult[k] /= s
                changed = True
    return ints[0], ints[1], ints[2], mult


def _holzer_search(a: int, b: int, c: int):
    """Search within Holzer's bounds, solving for the variable with smallest coefficient."""
    order = sorted(range(3), key=lambda i: abs((a, b, c)[i]))
    co = (a, b, c)
    i0, i1, i2 = order
    b1 = math.isqrt(abs(co[i0] * co[i2])) + 1
    b2 = math.isqrt(abs(co[i0] * co[i1])) + 1
    for u in range(0, b1 + 1):
        for v in range(0, b2 + 1):
            if u == 0 and v == 0:
                continue
            rest = -(co[i1] * u * u + co[i2] * v * v)
            if rest % co[i0]:
                continue
            w2 = rest // co[i0]
            if w2 < 0:
                continue
            w = math.isqrt(w2)
            if w * w == w2:
                out = [0, 0, 0]
                out[i0], out[i1], out[i2] = w, u, v
                return tuple(out)
    return None


def _legendre_point(a: int, b: int, c: int):
    from sympy import symbols
    from sympy.solvers.diophantine.diophantine import diop_ternary_quadratic_normal

    x, y, z = symbols("x y z", integer=True)
    sol = diop_ternary_quadratic_normal(a * x**2 + b * y**2 + c * z**2)
    if sol and sol[0] is not None:
        X, Y, Z = (int(v) for v in sol)
        if a * X * X + b * Y * Y + c * Z * Z == 0 and (X, Y, Z) != (0, 0, 0):
            return X, Y, Z
    return _holzer_search(a, b, c)


def legendre_solvable(a: int, b: int, c: int):
    """None when a x^2 + b y^2 + c z^2 = 0 is soluble, else the failing place."""
    if (a > 0 and b > 0 and c > 0) or (a < 0 and b < 0 and c < 0):
        return "inf"
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        if not _is_qr(-y * z, x):
            for p, _ in flint.fmpz(abs(x)).factor():
                p = int(p)
                r = (-y * z) % p
                if r and p > 2 and pow(r, (p - 1) // 2, p) != 1:
                    return p
    return None


def has_point_over_Q(Q: ConicForm):
    """A rational point, or NoPoint naming a place where the conic is insoluble."""
    if not Q.K.is_rational():
        raise ValueError("has_point_over_Q needs a conic over Q")
    F = Q.field
    diag, T = diagonalize(Q)
    qs = [d.to_fraction() for d in diag]
    a, b, c, mult = _legendre_normal(qs)
    place = legendre_solvable(a, b, c)
    if place is not None:
        # the prime 2 is never reported above; it is forced by the product formula
        return NoPoint(place)
    sol = _legendre_point(a, b, c)
    if sol is None:
        # Legendre's conditions hold, so this cannot happen
        raise AssertionError("Legendre conditions hold but no point was found")
    v = [F(sol[i] * mult[i]) for i in range(3)]
    P = mat_vec(T, v)
    P = _primitive(P)
    assert not Q(P), "point does not lie on the conic"
    return ConicPoint(tuple(P))


def _primitive(P):
    """Scale a rational point to coprime integers with a positive leading entry."""
    fr = [x.to_fraction() if x.is_rational() else None for x in P]
    if any(f is None for f in fr):
        return tuple(P)
    den = 1
    for f in fr:
        den = den * f.denominator // math.gcd(den, f.denominator)
    ints = [int(f * den) for f in fr]
    g = 0
    for n in ints:
        g = math.gcd(g, n)
    ints = [n // g for n in ints]
    lead = next(n for n in ints if n)
    if lead < 0:
        ints = [-n for n in ints]
    F = P[0].field
    return tuple(F(n) for n in ints)


# ---------------------------------------------------------------------------
# over other subfields


def _split_primes(M: int, count: int) -> list[int]:
    out = []
    ell = M + 1 if M > 1 else 3
    while len(out) < count:
        if ell > 2 and flint.fmpz(ell).is_prime():
            out.append(ell)
        ell += M if M > 1 else 2
    return out


def _root_of_phi(ell: int, M: int) -> int:
    """An element of order M in F_ell^* (ell = 1 mod M)."""
    if M <= 2:
        return 1 if M == 1 else ell - 1
    primes = [int(q) for q, _ in flint.fmpz(M).factor()]
    g = 2
    while True:
        z = pow(g, (ell - 1) // M, ell)
        if all(pow(z, M // p, ell) != 1 for p in primes):
            return z
        g += 1


def _sqrt_in(K: SubfieldSpec, r: CycloElem):
    if not r:
        return r
    F = r.field
    for s in rational_roots(Poly(F, [-r, F.zero, F.one])):
        if is_in_subfield(s, K):
            return s
    return None


def search_point_over_K(Q: ConicForm, K: SubfieldSpec, budget: int = 6):
    """Bounded search for a point of Q over K; Inconclusive when none is found.

    The form is diagonalized to alpha x^2 + beta y^2 + gamma z^2 and pairs (y, z)
    of small coordinates in the Gauss-period basis of K are tried in order of
    height, keeping those where -(beta y^2 + gamma z^2)/alpha is a square in K.
    Squares are pre-screened by quadratic residue symbols at split primes.
    """
    F = Q.field
    K = K.restrict_to(F.N)
    for i in range(3):
        if not Q.gram[i][i]:
            v = [F.zero] * 3
            v[i] = F.one
            return ConicPoint(tuple(v))
    (alpha, beta, gamma), T = diagonalize(Q)
    # points with one vanishing diagonal coordinate
    for (i, ci), (j, cj) in itertools.combinations(enumerate((alpha, beta, gamma)), 2):
        s = _sqrt_in(K, -cj / ci)
        if s is not None:
            v = [F.zero] * 3
            v[i], v[j] = s, F.one
            P = mat_vec(T, v)
            assert not Q(P)
            return ConicPoint(tuple(P))
    basis = K.fixed_basis
    m = len(basis)
    ratio_b = -beta / alpha
    ratio_c = -gamma / alpha
    # residues of the basis and of the ratios at several split primes
    M = F.N
    primes = _split_primes(M, 6)
    probes = []
    for ell in primes:
        z = _root_of_phi(ell, M)
        for k in (1, 2):
            zz = pow(z, k, ell) if M > 2 and math.gcd(k, M) == 1 else z
            try:
                bres = [x.reduce_mod(ell, zz) for x in basis]
                rb = ratio_b.reduce_mod(ell, zz)
                rc = ratio_c.reduce_mod(ell, zz)
            except ZeroDivisionError:
                continue
            probes.append((ell, np.array(bres, dtype=np.int64), rb, rc))
    tried = 0
    for h in range(1, budget + 1):
        # all coefficient vectors with max-norm h, split by the first nonzero of z
        grid = np.array(list(itertools.product(range(-h, h + 1), repeat=m)), dtype=np.int64)
        shell = grid[np.max(np.abs(grid), axis=1) == h]
        inner = grid[np.max(np.abs(grid), axis=1) < h]
        # pairs (y, z) of max-height exactly h, z != 0
        for ys, zs in ((shell, grid), (inner, shell)):
            zs = zs[np.any(zs != 0, axis=1)]
            if not len(zs) or not len(ys):
                continue
            Y = np.repeat(ys, len(zs), axis=0)
            Z = np.tile(zs, (len(ys), 1))
            mask = np.ones(len(Y), dtype=bool)
            for ell, bres, rb, rc in probes:
                yr = (Y % ell) @ (bres % ell) % ell
                zr = (Z % ell) @ (bres % ell) % ell
                val = (rb * (yr * yr % ell) + rc * (zr * zr % ell)) % ell
                e = (ell - 1) // 2
                leg = _vec_pow(val, e, ell)
                mask &= (val == 0) | (leg == 1)
            idx = np.nonzero(mask)[0]
            tried += len(Y)
            for k in idx:
                y = sum((basis[i] * int(Y[k][i]) for i in range(m) if Y[k][i]), F.zero)
                zc = sum((basis[i] * int(Z[k][i]) for i in range(m) if Z[k][i]), F.zero)
                r = ratio_b * y * y + ratio_c * zc * zc
                x = _sqrt_in(K, r)
                if x is None:
                    continue
                P = mat_vec(T, (x, y, zc))
                if any(P) and not Q(P):
                    return ConicPoint(tuple(P))
    return Inconclusive(f"no point with coordinates of height <= {budget}", budget)


def _vec_pow(base: np.ndarray, e: int, ell: int) -> np.ndarray:
    result = np.ones_like(base)
    b = base % ell
    while e:
        if e & 1:
            result = result * b % ell
        b = b * b % ell
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# back to PGL2


def _param_point(Q: ConicForm, P, D0, D1, s: CycloElem):
    D = tuple(a + s * b for a, b in zip(D0, D1))
    B = bilinear(Q.gram, P, D)
    qd = Q(D)
    return tuple(2 * B * d - qd * p for d, p in zip(D, P))


def trivializer_from_point(M: Matrix, P: ConicPoint, z=None) -> Mobius:
    """A with z(s) = A^-1 s(A), from a K-point P on the conic Q0(M^-1 x) = 0.

    Lines through P parametrize the conic over K; pushing the parameter through
    M^-1 lands on Q0, where the Veronese map is inverted.  The resulting Mobius
    map from the K-line to the L-line is the trivializer (up to the orientation
    convention, which is checked against z when it is supplied).
    """
    F = M[0][0].field
    P = tuple(F(x) if not isinstance(x, CycloElem) else x for x in P.coords)
    Minv = mat_inv(M)
    gram = mat_mul(mat_mul(transpose(Minv), q0_gram(F)), Minv)
    Qf = _RawForm(gram)
    if Qf(P):
        raise ValueError("point is not on the conic")
    std = [tuple(F.one if i == j else F.zero for j in range(3)) for i in range(3)]
    # directions completing P to a basis
    D0 = D1 = None
    for a, b in itertools.combinations(std, 2):
        if mat_det((P, a, b)):
            D0, D1 = a, b
            break
    taus, targets = [], []
    for sv in (0, 1, -1, 2, -2, 3, 1 / 2, 1 / 3):
        s = F(Fraction(sv).limit_denominator())
        rho = _param_point(Qf, P, D0, D1, s)
        if not any(rho):
            continue
        w = mat_vec(Minv, rho)
        # w is proportional to (u^2, uv, v^2)
        if w[0]:
            t = w[0] / w[1] if w[1] else INF
        else:
            t = w[1] / w[2]
        if any(_same(t, t2) for t2 in targets):
            continue
        taus.append(s)
        targets.append(t)
        if len(taus) == 3:
            break
    if len(taus) < 3:
        raise ConventionMismatch("could not find three distinct parameter values")
    B = _interpolate(F, taus, targets)
    if B is None:
        raise ConventionMismatch("interpolation of the parametrization failed")
    candidates = [B.inverse(), B]
    if z is None:
        return candidates[0]
    from .cohomology import is_coboundary_of

    for A in candidates:
        if is_coboundary_of(A, z):
            return A
    raise ConventionMismatch("no orientation of the parametrization trivializes the cocycle")


def _same(a, b) -> bool:
    if a is INF or b is INF:
        return a is b
    return a == b


class _RawForm:
    def __init__(self, gram):
        self.gram = gram

    def __call__(self, v):
        return bilinear(self.gram, v, v)
