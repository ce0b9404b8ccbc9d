"""Exception hierarchy shared by every module."""


class XSpecialError(Exception):
    """Base class for all library errors."""


class NotPrime(XSpecialError, ValueError):
    pass


class ParseError(XSpecialError, ValueError):
    pass


class IndexOutOfRange(XSpecialError, IndexError):
    pass


class DimensionMismatch(XSpecialError, ValueError):
    pass


class NotMFamily(XSpecialError, ValueError):
    """M_n was requested over a table that is not a prime field."""


class NotAField(XSpecialError, ValueError):
    pass


class TooLarge(XSpecialError):
    """An enumeration or dense-matrix guard was exceeded."""


class PreconditionFailed(XSpecialError):
    pass


class NoConvergence(XSpecialError, ArithmeticError):
    pass


class NoWitness(XSpecialError):
    """Raised when a certified edge witness cannot be found (soundness violation)."""


class SameVertex(XSpecialError, ValueError):
    pass


class DifferentSides(XSpecialError, ValueError):
    pass
