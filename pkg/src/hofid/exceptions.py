"""Exception hierarchy shared by the solver modules."""


class HofidError(Exception):
    """Base class for all solver errors."""


class IllConditionedStencilError(HofidError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class GridTooCoarseError(HofidError):
    pass


class ProblemDefinitionError(HofidError):
    """Bad problem data: unknown catalog name, invalid truncation, unsupported transform."""


class CoefficientError(HofidError):
    """A coefficient is non-finite, or w <= 0, at a grid point."""


class SingularShiftError(HofidError):
    """The shifted matrix has a numerically zero pivot."""


class NonConvergenceError(HofidError):
    def __init__(self, message, lam=None, vector=None):
        super().__init__(message)
        self.lam = lam
        self.vector = vector


class WrongBranchError(HofidError):
    """The converged eigenvector has the wrong number of sign changes."""

    def __init__(self, message, lam=None, vector=None, zero_count=None):
        super().__init__(message)
        self.lam = lam
        self.vector = vector
        self.zero_count = zero_count


class IndexOutOfRangeError(HofidError):
    pass


class DegenerateVectorError(HofidError):
    pass
