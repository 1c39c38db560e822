#!/usr/bin/env python3
"""Regenerate src/modtwist/data/fixtures/*.json.

Every curve comes with an eta-quotient hauptmodul h.  The map pi is given as a
formula in t; with --refit it is instead recovered as the unique degree-d
rational function with pi(h) = j (nullspace of the linear system on q-expansion
coefficients) and compared with the formula.  pi(h) = j is checked before any
file is written.

    python3 tools/make_fixtures.py [--refit] [--out DIR]
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import sympy as sp

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from modtwist.cyclotomic import CycloField  # noqa: E402
from modtwist.pipeline import CurveFixture, check_j_expansion  # noqa: E402
from modtwist.qexp import eta_quotient, j_series  # noqa: E402
from modtwist.ratfunc import LaurentSeries, Mobius, Poly, RatFunc, compose_mobius  # noqa: E402

ETA_NOTE = "hauptmodul is prod eta(m tau / w)^r over the listed (m, r), times the scale, plus the shift"

# label, p, n, eta factors {m: r}, width w, scale, shift, formula for pi(t)
CURVES = [
    ("Gamma0(2)", 2, 1, {1: 24, 2: -24}, 1, 1, 0, "(t+256)**3/t**2"),
    ("Gamma0(3)", 3, 1, {1: 12, 3: -12}, 1, 1, 0, "(t+27)*(t+243)**3/t**3"),
    ("Gamma0(4)", 2, 2, {1: 8, 4: -8}, 1, 1, 0, "(t**2+256*t+4096)**3/(t**4*(t+16))"),
    ("Gamma0(5)", 5, 1, {1: 6, 5: -6}, 1, 1, 0, "(t**2+250*t+3125)**3/t**5"),
    ("Gamma0(7)", 7, 1, {1: 4, 7: -4}, 1, 1, 0, "(t**2+13*t+49)*(t**2+245*t+2401)**3/t**7"),
    ("Gamma0(8)", 2, 3, {1: 4, 4: 2, 2: -2, 8: -4}, 1, 1, 0,
     "(t**4+256*t**3+5120*t**2+32768*t+65536)**3/(t**8*(t+4)*(t+8)**2)"),
    ("Gamma0(9)", 3, 2, {1: 3, 9: -3}, 1, 1, 0,
     "(t+9)**3*(t**3+243*t**2+2187*t+6561)**3/(t**9*(t**2+9*t+27))"),
    ("Gamma0(13)", 13, 1, {1: 2, 13: -2}, 1, 1, 0,
     "(s**2+5*s+13)*(s**4+7*s**3+20*s**2+19*s+1)**3/s, s = 13/t"),
    ("Gamma0(16)", 2, 4, {1: 2, 8: 1, 2: -1, 16: -2}, 1, 1, 0,
     "(t**8+256*t**7+5632*t**6+53248*t**5+282624*t**4+917504*t**3+1835008*t**2+2097152*t+1048576)**3"
     "/(t**16*(t+2)*(t+4)**4*(t**2+4*t+8))"),
    ("Gamma0(25)", 5, 2, {1: 1, 25: -1}, 1, 1, 0,
     "(t**10+250*t**9+4375*t**8+35000*t**7+178125*t**6+631250*t**5+1640625*t**4+3125000*t**3"
     "+4296875*t**2+3906250*t+1953125)**3/(t**25*(t**4+5*t**3+15*t**2+25*t+25))"),
    ("Gamma(2)", 2, 1, {1: 8, 4: 16, 2: -24}, 2, 16, 0, "256*(t**2-t+1)**3/(t**2*(t-1)**2)"),
    ("Gamma(3)", 3, 1, {1: 3, 9: -3}, 3, Fraction(1, 3), 1, "27*t**3*(t**3+8)**3/(t**3-1)**3"),
    # same curve, hauptmodul moved by -zeta_3 so that pi has non-rational coefficients
    ("Gamma(3)-shifted", 3, 1, {1: 3, 9: -3}, 3, Fraction(1, 3), "1-zeta3",
     "27*s**3*(s**3+8)**3/(s**3-1)**3, s = t+zeta3"),
]

EXTRA_TERMS = 10  # hauptmodul terms beyond q^-1, in units of q


def _poly(F: CycloField, expr, t) -> Poly:
    P = sp.Poly(sp.expand(expr), t)
    coeffs = [Fraction(int(sp.numer(c)), int(sp.denom(c))) for c in reversed(P.all_coeffs())]
    return Poly(F, [F(c) for c in coeffs])


def pi_from_formula(formula: str) -> RatFunc:
    t, s = sp.symbols("t s")
    body, _, sub = formula.partition(", s = ")
    num, den = sp.fraction(sp.together(sp.sympify(body, locals={"t": t, "s": s})))
    var = s if sub else t
    Q = CycloField(1)
    base = RatFunc(_poly(Q, num, var), _poly(Q, den, var))
    if not sub:
        return base
    if sub == "13/t":
        return compose_mobius(base, Mobius(0, 13, 1, 0, field=Q))
    if sub == "t+zeta3":
        F = CycloField(3)
        return compose_mobius(base.embed(3), Mobius(F.one, F.zeta(), F.zero, F.one, field=F))
    raise ValueError(f"unsupported substitution {sub}")


def hauptmodul(factors, width, scale, shift, terms: int = EXTRA_TERMS) -> LaurentSeries:
    v = sum(m * r for m, r in factors.items()) // 24
    h = eta_quotient(factors, width, v + (terms + 1) * width, scale=scale)
    if shift == "1-zeta3":
        F = CycloField(3)
        return h.embed(3) + LaurentSeries.constant(F, F.one - F.zeta(), width)
    return h + shift if shift else h


def fit_pi(h: LaurentSeries, d: int) -> RatFunc:
    """The degree-d map with pi(h) = j, from the one-dimensional nullspace."""
    F = CycloField(1)
    rows = 2 * d + 12
    j = j_series(rows + 2)
    powers = [LaurentSeries.constant(F, 1, h.width)]
    for _ in range(d):
        powers.append(powers[-1] * h)
    cols = [j.with_width(h.width) * p for p in powers] + [p * -1 for p in powers]
    lo = min(c.valuation for c in cols)
    hi = min(c.precision for c in cols if c.precision is not None)
    M = sp.Matrix([[sp.Rational(str(c.coefficient(e).to_fraction())) for c in cols] for e in range(lo, hi)])
    ns = M.nullspace()
    if len(ns) != 1:
        raise RuntimeError(f"nullity {len(ns)}, expected 1")
    v = ns[0]
    t = sp.symbols("t")
    den = sum(v[i] * t ** i for i in range(d + 1))
    num = sum(v[d + 1 + i] * t ** i for i in range(d + 1))
    return RatFunc(_poly(F, num, t), _poly(F, den, t))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--refit", action="store_true", help="recover pi from h and compare with the formula")
    ap.add_argument("--out", default=str(ROOT / "src" / "modtwist" / "data" / "fixtures"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for label, p, n, factors, width, scale, shift, formula in CURVES:
        pi = pi_from_formula(formula)
        h = hauptmodul(factors, width, scale, shift)
        if args.refit and pi.field.N == 1:
            fitted = fit_pi(hauptmodul(factors, width, scale, shift, 2 * pi.degree + 16), pi.degree)
            if fitted != pi:
                raise SystemExit(f"{label}: fitted map differs from the formula")
        bad = check_j_expansion(pi, h, depth=EXTRA_TERMS - 2)
        if bad is not None:
            raise SystemExit(f"{label}: pi(h) != j at q^{bad}")
        eta = ", ".join(f"({m}, {r})" for m, r in factors.items())
        prov = (f"pi(t) = {formula}; h from eta factors {eta}, width {width}, scale {scale}, shift {shift}. "
                f"{ETA_NOTE}. Generated by tools/make_fixtures.py; pi(h) = j checked through "
                f"q^{EXTRA_TERMS - 3}.")
        fx = CurveFixture(label, p, n, pi, h, prov)
        slug = label.lower().replace("(", "_").replace(")", "").replace("-", "_")
        (out / f"{slug}.json").write_text(json.dumps(fx.to_json(), indent=1) + "\n")
        print(f"{label}: degree {pi.degree}, written {slug}.json")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
