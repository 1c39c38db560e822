"""Shared strategies and small builders for the test suite."""

from __future__ import annotations

import os
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from modtwist.cyclotomic import CycloField
from modtwist.linalg import mat_det
from modtwist.ratfunc import Mobius, Poly, RatFunc

settings.register_profile(
    "default", max_examples=30, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.large_base_example])
settings.register_profile(
    "thorough", max_examples=300, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.large_base_example])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SMALL_CONDUCTORS = (3, 4, 5, 7, 8, 9, 16)

small_fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 3))


@st.composite
def elements(draw, N: int, nonzero: bool = False):
    F = CycloField(N)
    coeffs = draw(st.lists(small_fractions, min_size=F.degree, max_size=F.degree))
    a = F.elem(coeffs)
    if nonzero and not a:
        a = a + 1
    return a


@st.composite
def mobius(draw, N: int):
    F = CycloField(N)
    while True:
        a, b, c, d = (draw(elements(N)) for _ in range(4))
        if a * d - b * c:
            return Mobius(a, b, c, d, field=F)
        # nudge towards an invertible matrix instead of rejecting
        a, d = a + 1, d + 1
        if a * d - b * c:
            return Mobius(a, b, c, d, field=F)


@st.composite
def ratfuncs(draw, N: int, max_degree: int = 3):
    F = CycloField(N)
    while True:
        dn = draw(st.integers(0, max_degree))
        dd = draw(st.integers(0, max_degree))
        num = [draw(elements(N)) for _ in range(dn)] + [draw(elements(N, nonzero=True))]
        den = [draw(elements(N)) for _ in range(dd)] + [F.one]
        pi = RatFunc(Poly(F, num), Poly(F, den))
        if pi.degree >= 1:
            return pi


def random_gl(F: CycloField, rng, n: int, height: int = 2):
    while True:
        m = tuple(tuple(F.random_element(rng, height) for _ in range(n)) for _ in range(n))
        if mat_det(m):
            return m


def random_mobius(F: CycloField, rng, height: int = 2) -> Mobius:
    (a, b), (c, d) = random_gl(F, rng, 2, height)
    return Mobius(a, b, c, d, field=F)


def poly(F: CycloField, *coeffs) -> Poly:
    return Poly(F, [F(c) for c in coeffs])


def ratfunc(F: CycloField, num, den=(1,)) -> RatFunc:
    return RatFunc(poly(F, *num), poly(F, *den))



# --- acceptance criteria report ---------------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    key = (m.args[0], m.args[1])
    if rep.when == "call" or rep.outcome != "passed":
        # a setup error or a failing call decides; a clean teardown does not overwrite it
        if _CRITERIA.get(key) != "failed":
            _CRITERIA[key] = rep.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), outcome in sorted(_CRITERIA.items()):
        word = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{word}  criterion {num}: {title}")
