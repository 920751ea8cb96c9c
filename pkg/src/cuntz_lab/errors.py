"""Exception types shared across the library."""


class CuntzLabError(Exception):
    """Base class for library errors."""


class IllFormedHom(CuntzLabError):
    """A matrix does not send source relations into the target relation lattice."""


class BadModulus(CuntzLabError):
    pass


class ShapeMismatch(CuntzLabError):
    pass


class ForeignElement(CuntzLabError):
    """An element does not belong to the object it was passed to."""


class NotIncreasing(CuntzLabError):
    pass


class UndecidedError(CuntzLabError):
    """A bounded search ran out of depth before reaching a verdict."""

    def __init__(self, message, depth=None):
        super().__init__(message)
        self.depth = depth


class UnsupportedKind(CuntzLabError):
    pass


class StageMismatch(CuntzLabError):
    pass


class IncompatibleCone(CuntzLabError):
    pass


class NotAlgebraic(CuntzLabError):
    pass


class NotUnital(CuntzLabError):
    pass


class NotInCuU(CuntzLabError):
    """The object fails one of the conditions needed for K-theory recovery."""

    def __init__(self, condition, witness=None):
        super().__init__(f"not in the unital category: {condition}")
        self.condition = condition
        self.witness = witness


class IncompatibleSquares(CuntzLabError):
    pass


class MissingFlags(CuntzLabError):
    pass


class MissingQuotientData(CuntzLabError):
    pass


class SizeExceeded(CuntzLabError):
    pass


class SchemaError(CuntzLabError):
    pass


class ValidationError(CuntzLabError):
    def __init__(self, message, failures=()):
        super().__init__(message)
        self.failures = list(failures)
