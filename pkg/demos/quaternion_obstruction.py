#!/usr/bin/env python3
"""A cocycle that is not a coboundary, and how each route reports it.

t - 1/t is fixed by w: t -> -1/t.  Sending complex conjugation to w is a
cocycle of Gal(Q(i)/Q) with values in Aut(pi).  Its conic is x^2 + y^2 + z^2
up to scaling, which has no real point, so no Q-form of pi realizes it.  The
neighbouring cocycle built from t -> 1/t (for t + 1/t) does trivialize.

    python3 demos/quaternion_obstruction.py
"""

from modtwist.cohomology import Cocycle, galois_group, trivialize_cocycle
from modtwist.conic import diagonalize
from modtwist.cyclotomic import CycloField, SubfieldSpec
from modtwist.ratfunc import Mobius, Poly, RatFunc, compose_mobius


def show(label, pi, w):
    F = pi.field
    G = galois_group(4, SubfieldSpec(4, [3]))
    z = Cocycle(G, {1: Mobius.identity(F), 3: w})
    print(f"{label}: pi = {pi!r}, z(conjugation) = {w!r}, cocycle: {z.check()}")
    for route in ("conic", "cyclic-norm"):
        res = trivialize_cocycle(z, route)
        if isinstance(res, Mobius):
            print(f"  {route:11s}: A = {res!r}; pi o A^-1 = {compose_mobius(pi, res.inverse())!r}")
        else:
            print(f"  {route:11s}: {res.reason} (witness {res.witness})")
            if res.conic is not None:
                diag, _ = diagonalize(res.conic)
                print(f"  {'':11s}  diagonal conic: {[str(x.to_fraction()) for x in diag]}")
    print()


def main():
    F = CycloField(4)
    minus = RatFunc(Poly(F, [F(-1), F.zero, F.one]), Poly(F, [F.zero, F.one]))
    plus = RatFunc(Poly(F, [F.one, F.zero, F.one]), Poly(F, [F.zero, F.one]))
    show("t - 1/t", minus, Mobius(0, -1, 1, 0, field=F))
    show("t + 1/t", plus, Mobius(0, 1, 1, 0, field=F))


if __name__ == "__main__":
    main()
