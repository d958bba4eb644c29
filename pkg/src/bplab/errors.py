"""Exception hierarchy shared by all bplab modules."""


class BplabError(Exception):
    """Base class for library errors."""


class InvalidArgument(BplabError, ValueError):
    pass


class InvalidDiscriminant(InvalidArgument):
    pass


class NotInvariantError(BplabError, ValueError):
    """A Laurent polynomial is not fixed by one of the Weyl generators."""

    def __init__(self, generator, message=None):
        self.generator = generator
        super().__init__(message or f"polynomial is not invariant under {generator}")


class SingularSystemError(BplabError, ArithmeticError):
    pass


class ConvergenceFailure(BplabError, ArithmeticError):
    """Numerical error estimate exceeded the requested tolerance.

    The best available value is kept on ``value`` and the estimate on ``error``.
    """

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class EnvelopeError(BplabError, RuntimeError):
    """A rejection sampler met a density value above its envelope."""


class DegenerateMeasure(BplabError, ArithmeticError):
    pass


class PoleError(BplabError, ZeroDivisionError):
    def __init__(self, factor, message=None):
        self.factor = factor
        super().__init__(message or f"local factor has a pole: {factor} vanishes")


class UnsupportedRegion(BplabError, ValueError):
    pass


class InvalidCombination(InvalidArgument):
    pass
