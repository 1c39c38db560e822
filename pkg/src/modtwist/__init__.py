"""Twists of genus-0 modular curves over subfields of cyclotomic fields.

Exact arithmetic throughout: cyclotomic fields, rational functions and Mobius
maps over them, PGL2 cocycles and their trivialization, conics, and a search /
verify pipeline over curve fixtures.
"""

from .cyclotomic import CycloElem, CycloField, SubfieldSpec
from .errors import TwistError
from .ratfunc import INF, LaurentSeries, Mobius, Poly, RatFunc

__version__ = "0.1.0"

__all__ = [
    "CycloField",
    "CycloElem",
    "SubfieldSpec",
    "Poly",
    "RatFunc",
    "Mobius",
    "LaurentSeries",
    "INF",
    "TwistError",
]
