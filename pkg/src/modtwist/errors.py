"""Exception hierarchy.

Everything raised on purpose by the package derives from ``TwistError`` so a
caller can catch the whole family at once.
"""


class TwistError(Exception):
    pass


class DivisionByZero(TwistError, ZeroDivisionError):
    pass


class NotAUnit(TwistError, ValueError):
    pass


class NotADivisor(TwistError, ValueError):
    pass


class NotASubfield(TwistError, ValueError):
    pass


class SingularMatrix(TwistError, ValueError):
    pass


class Indeterminate(TwistError, ArithmeticError):
    """Both numerator and denominator vanish at the evaluation point."""


class InsufficientPrecision(TwistError, ArithmeticError):
    pass


class BadPrime(TwistError, ArithmeticError):
    pass


class PrecisionExhausted(TwistError, ArithmeticError):
    pass


class DegenerateProbes(TwistError, RuntimeError):
    pass


class NonconstantDegreeOne(TwistError, ValueError):
    """Raised for degree-one maps, whose automorphism group is all of PGL2."""


class ProjectionRankDeficient(TwistError, RuntimeError):
    """The averaging projector did not produce a full basis (an internal bug)."""


class NormMismatch(TwistError, ValueError):
    pass


class InvalidCocycle(TwistError, ValueError):
    pass


class ConventionMismatch(TwistError, RuntimeError):
    pass


class SchemaError(TwistError, ValueError):
    pass


class InvariantViolation(TwistError, ValueError):
    pass
