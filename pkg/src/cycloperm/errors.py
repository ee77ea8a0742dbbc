"""Exception hierarchy shared by every module."""


class CyclopermError(ValueError):
    """Base class for all input and precondition errors."""


class NotPrime(CyclopermError):
    pass


class ReducibleModulus(CyclopermError):
    pass


class DegreeMismatch(CyclopermError):
    pass


class FieldMismatch(CyclopermError):
    pass


class ZeroInverse(CyclopermError, ZeroDivisionError):
    pass


class NotPrimitive(CyclopermError):
    pass


class FieldTooLarge(CyclopermError):
    pass


class MalformedInput(CyclopermError):
    pass


class NotADivisor(CyclopermError):
    pass


class ZeroConstantViolation(CyclopermError):
    pass


class NotFactorable(CyclopermError):
    pass


class ZeroElement(CyclopermError):
    pass


class ZeroCoefficient(CyclopermError):
    pass


class ZeroDenominator(CyclopermError, ZeroDivisionError):
    pass


class PreconditionUnmet(CyclopermError):
    pass


class HypothesisFails(CyclopermError):
    pass
