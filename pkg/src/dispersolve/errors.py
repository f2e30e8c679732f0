"""Exception hierarchy shared by all dispersolve modules."""


class DispersolveError(Exception):
    """Base class for all errors raised by this package."""


class GridSizingError(DispersolveError):
    """A stencil, trajectory, or derivative order does not fit the grid."""


class GridMismatchError(DispersolveError):
    """Operands live on different grids or have incompatible shapes."""


class ParameterError(DispersolveError):
    """An argument violates its documented precondition."""


class ConfigError(DispersolveError):
    """A run configuration file is malformed or inconsistent."""


class NumericalFailureError(DispersolveError):
    """A solve produced non-finite values or an unusable factorization.

    Attributes carry diagnostic context where available: ``step`` is the
    time-step index at which NaN/Inf appeared, ``pivot`` the smallest pivot
    magnitude of a rejected factorization.
    """

    def __init__(self, message, step=None, pivot=None):
        super().__init__(message)
        self.step = step
        self.pivot = pivot


class NonConvergenceError(DispersolveError):
    """Fixed-point iteration hit its iteration cap before the tolerance.

    Carries the contraction log and the last iterate so callers can emit a
    partial report.
    """

    def __init__(self, message, log=None, last=None):
        super().__init__(message)
        self.log = log
        self.last = last
