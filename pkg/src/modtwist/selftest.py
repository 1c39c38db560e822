"""Quick built-in checks behind ``modtwist selftest``.

A condensed version of the property suites in tests/: each check returns
(name, passed, detail) and nothing here raises on a failed property.
"""

from __future__ import annotations

import random
import time

from .cohomology import MatrixCocycle, galois_group, hilbert90
from .conic import ConicForm, bilinear, has_point_over_Q, phi, q0_gram, ConicPoint
from .cyclotomic import CycloField, SubfieldSpec, cyclotomic_polynomial, units_mod
from .linalg import mat_det, mat_galois, mat_inv, mat_mul
from .pipeline import search, shipped_fixtures, verify
from .ratfunc import Mobius, Poly, RatFunc
from .solver import aut_group

__all__ = ["run_selftest"]


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _check_cyclotomic(rng):
    for N in range(1, 61):
        prod = [1]
        for d in range(1, N + 1):
            if N % d == 0:
                prod = _poly_mul(prod, cyclotomic_polynomial(d))
        if prod != [-1] + [0] * (N - 1) + [1]:
            return False, f"product identity fails at N={N}"
    for N in (3, 4, 5, 7, 8, 9, 16):
        F = CycloField(N)
        for _ in range(20):
            a, b = F.random_element(rng), F.random_element(rng)
            d = rng.choice(units_mod(N))
            if (a * b).galois(d) != a.galois(d) * b.galois(d) or (a + b).galois(d) != a.galois(d) + b.galois(d):
                return False, f"sigma_{d} is not a ring map on K_{N}"
    return True, ""


def _check_aut(rng):
    F9 = CycloField(9)
    t = Poly(F9, [0, 1])
    n3 = len(aut_group(RatFunc(t ** 3, Poly(F9, [1])), F9))
    Q = CycloField(1)
    s = Poly(Q, [0, 1])
    n2 = len(aut_group(RatFunc(s * s + 1, s), Q))
    return (n3, n2) == (3, 2), f"|Aut(t^3)| = {n3}, |Aut(t + 1/t)| = {n2}"


def _random_gl2(F, rng):
    while True:
        m = tuple(tuple(F.random_element(rng, 2) for _ in range(2)) for _ in range(2))
        if mat_det(m):
            return m


def _check_hilbert90(rng):
    F = CycloField(5)
    G = galois_group(5, SubfieldSpec(5, units_mod(5)))
    for _ in range(5):
        A = _random_gl2(F, rng)
        Ainv = mat_inv(A)
        psi = MatrixCocycle(G, {d: mat_mul(Ainv, mat_galois(A, d)) for d in G.elements})
        B = hilbert90(psi)
        Binv = mat_inv(B)
        if any(mat_mul(Binv, mat_galois(B, d)) != psi(d) for d in G.elements):
            return False, "returned matrix does not split the cocycle"
    return True, ""


def _check_conic(rng):
    Q = CycloField(1)
    K = SubfieldSpec(1)

    def form(a, b, c):
        z = Q.zero
        return ConicForm(((Q(a), z, z), (z, Q(b), z), (z, z, Q(c))), K)

    if not isinstance(has_point_over_Q(form(1, 1, -1)), ConicPoint):
        return False, "x^2 + y^2 - z^2 has no point"
    if isinstance(has_point_over_Q(form(1, 1, 1)), ConicPoint):
        return False, "x^2 + y^2 + z^2 has a point"
    F = CycloField(8)
    G0 = q0_gram(F)
    for _ in range(10):
        m = _random_gl2(F, rng)
        P = phi(Mobius.from_matrix(m))
        v = [F.random_element(rng, 2) for _ in range(3)]
        w = [sum((P[i][j] * v[j] for j in range(3)), F.zero) for i in range(3)]
        if bilinear(G0, w, w) != bilinear(G0, v, v) or mat_det(P) != F.one:
            return False, "phi does not preserve Q0 with determinant 1"
    return True, ""


def _check_fixtures(rng):
    fixtures = shipped_fixtures()
    fx = fixtures["Gamma0(4)"]
    records = search(fx)
    rep = verify(records, fixtures)
    return rep.ok and bool(records), f"{len(fixtures)} fixtures ingested, {len(records)} Gamma0(4) records"


CHECKS = [
    ("cyclotomic", _check_cyclotomic),
    ("automorphisms", _check_aut),
    ("hilbert90", _check_hilbert90),
    ("conic", _check_conic),
    ("fixtures", _check_fixtures),
]


def run_selftest(seed: int = 0) -> list[tuple[str, bool, str]]:
    rng = random.Random(seed)
    out = []
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok, detail = fn(rng)
        except Exception as exc:  # a crash is a failed check, reported like the others
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        detail = (detail + "; " if detail else "") + f"{time.perf_counter() - t0:.2f}s"
        out.append((name, ok, detail))
    return out
