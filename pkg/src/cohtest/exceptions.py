"""Exception types raised by cohtest.

All of them derive from ``ValueError`` so callers that only care about bad
input can catch the builtin.
"""


class CohtestError(ValueError):
    pass


class SignalTooShort(CohtestError):
    pass


class InvalidBandRange(CohtestError):
    pass


class NoPeak(CohtestError):
    pass


class BadIndex(CohtestError, IndexError):
    pass


class ShapeMismatch(CohtestError):
    pass


class DegeneratePredictor(CohtestError):
    pass


class BadLag(CohtestError):
    pass


class BadTarget(CohtestError):
    pass


class DriverLoadError(CohtestError):
    pass


class EmptyInput(CohtestError):
    pass


class InsufficientData(CohtestError):
    pass
