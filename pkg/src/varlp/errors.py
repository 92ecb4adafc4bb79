"""Exception types raised by varlp."""


class VarLpError(Exception):
    """Base class for all library errors."""


class InvalidExponent(VarLpError, ValueError):
    pass


class ModularOverflow(VarLpError, OverflowError):
    """A modular term left the double-precision range (or an exponent exceeded the cap)."""


class NonConvergence(VarLpError, ArithmeticError):
    pass


class DisjointnessViolation(VarLpError, ValueError):
    pass


class EmptyImage(VarLpError, ValueError):
    pass


class OutOfDomain(VarLpError, ValueError):
    pass


class TruncationBreach(VarLpError, ValueError):
    pass


class SupportOverlap(VarLpError, ValueError):
    pass


class EmptyColumn(VarLpError, ValueError):
    pass


class RegimeViolation(VarLpError, ValueError):
    pass
