"""Exception types raised across the package."""


class InvalidParameterError(ValueError):
    """A physical or numerical parameter violates its precondition."""


class NoHarmonicWellError(InvalidParameterError):
    """T' >= 4T: the potential has no isolated harmonic minimum."""


class InvalidGridError(InvalidParameterError):
    """The charge grid is unsuitable for the requested operation."""


class NumericalFailure(ArithmeticError):
    """An iterative routine exhausted its budget.

    ``index`` identifies what failed (an eigenvalue index, a k-point, ...).
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index
