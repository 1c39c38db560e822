import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from modtwist.cohomology import Cocycle, coboundary, galois_group, is_coboundary_of
from modtwist.conic import (
    ConicForm,
    ConicPoint,
    Inconclusive,
    NoPoint,
    conic_from_cocycle,
    diagonalize,
    has_point_over_Q,
    phi,
    q0_gram,
    search_point_over_K,
    trivializer_from_point,
)
from modtwist.cyclotomic import CycloField, SubfieldSpec, is_in_subfield, units_mod
from modtwist.errors import SingularMatrix
from modtwist.linalg import identity, mat_det, mat_galois, mat_inv, mat_mul, transpose
from modtwist.ratfunc import Mobius

from conftest import mobius, random_mobius

Q = CycloField(1)
QQ = SubfieldSpec(1, [])


def congruent(M, G):
    return mat_mul(mat_mul(transpose(M), G), M)


def diag_form(a, b, c, F=Q, K=QQ):
    z = F.zero
    return ConicForm(((F(a), z, z), (z, F(b), z), (z, z, F(c))), K)


# --- the map to SO(Q0) ---------------------------------------------------------------


def test_phi_examples():
    assert phi(Mobius.identity(Q)) == identity(Q, 3)
    w = phi(Mobius(0, 1, 1, 0, field=Q))
    z, m = Q.zero, Q(-1)
    assert w == ((z, z, m), (z, m, z), (m, z, z))
    assert mat_mul(w, w) == identity(Q, 3)
    # scalars act trivially
    assert phi(Mobius(3, 0, 0, 3, field=Q)) == identity(Q, 3)


def test_phi_rejects_singular_input():
    g = Mobius.identity(Q)
    g.entries = (Q.one, Q.one, Q.one, Q.one)  # bypass the constructor check
    with pytest.raises(SingularMatrix):
        phi(g)


@pytest.mark.parametrize("N", [1, 4, 5, 9])
@given(data=st.data())
def test_phi_properties(N, data):
    g, h = data.draw(mobius(N)), data.draw(mobius(N))
    F = g.field
    P, Ph = phi(g), phi(h)
    G0 = q0_gram(F)
    assert congruent(P, G0) == G0
    assert mat_det(P) == 1
    assert mat_mul(P, Ph) == phi(g * h)
    d = data.draw(st.sampled_from(units_mod(N)))
    assert phi(g.galois(d)) == mat_galois(P, d)


# --- conics from cocycles --------------------------------------------------------------


@pytest.mark.parametrize("M, gens", [(4, [3]), (5, [4]), (8, [5]), (9, [4, 7]), (9, [4]), (16, [9])])
def test_conic_coefficients_are_in_k(M, gens):
    rng = random.Random(M)
    K = SubfieldSpec(M, gens)
    G = galois_group(M, K)
    z = coboundary(random_mobius(G.field, rng), G)
    C, Mat = conic_from_cocycle(z, K)
    assert all(is_in_subfield(x, K) for row in C.gram for x in row)
    for d in G.elements:
        assert mat_mul(mat_inv(Mat), mat_galois(Mat, d)) == phi(z(d))


def test_trivial_cocycle_gives_split_conic():
    F = CycloField(5)
    K = SubfieldSpec(5, units_mod(5))
    G = galois_group(5, K)
    z = Cocycle(G, {d: Mobius.identity(F) for d in G.elements})
    C, _ = conic_from_cocycle(z, K)
    assert isinstance(has_point_over_Q(C), ConicPoint)


# --- diagonalization ------------------------------------------------------------------------


def test_diagonalize_examples():
    (a, b, c), T = diagonalize(ConicForm(q0_gram(Q), QQ))
    assert a * b * c != 0
    # Q0 is isotropic, so the diagonal form is indefinite
    assert len({x.to_fraction() > 0 for x in (a, b, c)}) == 2
    G = congruent(T, q0_gram(Q))
    assert all(G[i][j] == 0 for i in range(3) for j in range(3) if i != j)
    assert mat_det(T)


@pytest.mark.parametrize("M, gens", [(1, []), (5, [4]), (8, [3])])
def test_diagonalize_round_trip(M, gens):
    rng = random.Random(11 * M)
    K = SubfieldSpec(M, gens) if M > 1 else QQ
    G = galois_group(M, K) if M > 1 else None
    for _ in range(5):
        if G is None:
            F = Q
            raw = [[F(rng.randint(-5, 5)) for _ in range(3)] for _ in range(3)]
            gram = tuple(tuple(raw[min(i, j)][max(i, j)] for j in range(3)) for i in range(3))
            if not mat_det(gram):
                continue
            C = ConicForm(gram, K)
        else:
            C, _ = conic_from_cocycle(coboundary(random_mobius(G.field, rng), G), K)
        diag, T = diagonalize(C)
        D = congruent(T, C.gram)
        assert [D[i][i] for i in range(3)] == list(diag)
        assert all(D[i][j] == 0 for i in range(3) for j in range(3) if i != j)
        assert all(is_in_subfield(x, C.K) for row in T for x in row)


# --- points over Q -----------------------------------------------------------------------


def test_pythagorean_conic():
    P = has_point_over_Q(diag_form(1, 1, -1))
    assert isinstance(P, ConicPoint)
    x, y, z = (c.to_fraction() for c in P.coords)
    assert x * x + y * y == z * z and z != 0


def test_definite_conic_fails_at_infinity():
    assert has_point_over_Q(diag_form(1, 1, 1)) == NoPoint("inf")


def test_conic_insoluble_at_three():
    res = has_point_over_Q(diag_form(1, 1, -3))
    assert isinstance(res, NoPoint) and res.place == 3


def test_has_point_needs_rational_field():
    F = CycloField(5)
    with pytest.raises(ValueError):
        has_point_over_Q(diag_form(1, 1, -1, F, SubfieldSpec(5, [4])))


@given(st.tuples(*(st.integers(-30, 30).filter(bool) for _ in range(3))))
def test_returned_points_lie_on_the_conic(abc):
    form = diag_form(*abc)
    res = has_point_over_Q(form)
    if isinstance(res, ConicPoint):
        assert not form(res.coords) and any(res.coords)
    else:
        assert isinstance(res, NoPoint)


# --- points over K ---------------------------------------------------------------------------


def test_search_obvious_point():
    F = CycloField(5)
    K = SubfieldSpec(5, [4])
    z = F.zero
    form = ConicForm(((z, F.one, z), (F.one, F(2), z), (z, z, F(3))), K)
    assert search_point_over_K(form, K) == ConicPoint((F.one, F.zero, F.zero))


def test_search_on_q0():
    F = CycloField(5)
    K = SubfieldSpec(5, [4])
    form = ConicForm(q0_gram(F), K)
    P = search_point_over_K(form, K)
    assert isinstance(P, ConicPoint) and not form(P.coords)


def test_search_finds_point_on_coboundary_conic():
    rng = random.Random(5)
    K = SubfieldSpec(5, [4])
    G = galois_group(5, K)
    found = 0
    for _ in range(5):
        z = coboundary(random_mobius(G.field, rng, height=1), G)
        C, M = conic_from_cocycle(z, K)
        P = search_point_over_K(C, K)
        assert isinstance(P, (ConicPoint, Inconclusive))
        if isinstance(P, ConicPoint):
            assert not C(P.coords)
            assert all(is_in_subfield(x, K) for x in P.coords)
            found += 1
    assert found >= 1


def test_search_over_real_quadratic_field_definite_is_not_found():
    # x^2 + y^2 + z^2 has no point in a real field; the bounded search cannot prove it
    F = CycloField(5)
    K = SubfieldSpec(5, [4])
    res = search_point_over_K(diag_form(1, 1, 1, F, K), K, budget=2)
    assert isinstance(res, (Inconclusive, NoPoint))


# --- trivializers from points ------------------------------------------------------------------


def test_trivializer_from_point_identity_case():
    F = CycloField(4)
    K = SubfieldSpec(4, [3])
    G = galois_group(4, K)
    z = Cocycle(G, {d: Mobius.identity(F) for d in G.elements})
    C, M = conic_from_cocycle(z, K)
    P = has_point_over_Q(C)
    A = trivializer_from_point(M, P, z)
    assert is_coboundary_of(A, z)
    assert A.galois(3) == A  # a trivializer of the trivial cocycle is defined over K


@pytest.mark.parametrize("seed", range(6))
def test_trivializer_round_trip_over_gaussian_field(seed):
    rng = random.Random(seed)
    F = CycloField(4)
    K = SubfieldSpec(4, [3])
    G = galois_group(4, K)
    z = coboundary(random_mobius(F, rng, height=3), G)
    C, M = conic_from_cocycle(z, K)
    P = has_point_over_Q(C)
    assert isinstance(P, ConicPoint)
    A = trivializer_from_point(M, P, z)
    assert is_coboundary_of(A, z)


def test_point_off_the_conic_is_rejected():
    F = CycloField(4)
    K = SubfieldSpec(4, [3])
    G = galois_group(4, K)
    z = Cocycle(G, {d: Mobius.identity(F) for d in G.elements})
    C, M = conic_from_cocycle(z, K)
    off = next(v for v in itertools.product((F.zero, F.one, F(2)), repeat=3) if any(v) and C(v))
    with pytest.raises(ValueError):
        trivializer_from_point(M, ConicPoint(off))


def test_conic_json_round_trip():
    F = CycloField(8)
    K = SubfieldSpec(8, [7])
    G = galois_group(8, K)
    C, _ = conic_from_cocycle(coboundary(random_mobius(F, random.Random(2)), G), K)
    assert ConicForm.from_json(C.to_json()) == C
