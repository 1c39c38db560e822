#!/usr/bin/env python3
"""Walk through one twist computation by hand, for the full level-3 curve.

Prints the automorphism group of pi, the cocycles over K_3 inside K_9, and for
each cocycle the matrix returned by both trivialization routes together with
the twisted map pi o A^-1, which has coefficients in K_3.

    python3 demos/twist_walkthrough.py
"""

from modtwist.cohomology import enumerate_cocycles, trivialize_cocycle
from modtwist.cyclotomic import SubfieldSpec
from modtwist.pipeline import automorphisms, search_level, shipped_fixtures
from modtwist.ratfunc import Mobius, coefficients_in, compose_mobius


def main():
    fx = shipped_fixtures()["Gamma(3)"]
    aut, b = automorphisms(fx)
    level = search_level(fx)
    print(f"{fx.label}: pi = {fx.pi_gamma!r}")
    print(f"|Aut(pi)| = {len(aut)} over K_{aut[0].field.N}; level bound b = {b}")

    K = SubfieldSpec(3, [1])  # the whole of K_3
    cocycles = enumerate_cocycles(fx.pi_gamma.embed(level), K, b, level=level)
    G = cocycles[0].group
    print(f"Gal(K_{G.M}/K_3) has order {G.order}; {len(cocycles)} cocycles\n")

    for i, z in enumerate(cocycles):
        print(f"cocycle {i}: " + ", ".join(f"s_{d} -> {z(d)!r}" for d in G.generators))
        pi = fx.pi_gamma.embed(G.M)
        for route in ("cyclic-norm", "conic"):
            A = trivialize_cocycle(z, route)
            if not isinstance(A, Mobius):
                print(f"  {route:11s}: {A}")
                continue
            twist = compose_mobius(pi, A.inverse())
            ok = coefficients_in(twist, K.restrict_to(G.M))
            print(f"  {route:11s}: A = {A!r}")
            print(f"  {'':11s}  pi o A^-1 = {twist!r}  (over K_3: {ok})")
        print()


if __name__ == "__main__":
    main()
