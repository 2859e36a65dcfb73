"""Exception hierarchy shared by all modules."""


class ILWError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ILWError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class UnboundedValueError(ILWError, OverflowError):
    """The requested value is infinite (e.g. K(k) at k = 1)."""


class ShapeError(ILWError, ValueError):
    """Array lengths or grids do not match."""


class AdmissibilityError(DomainError):
    """Elliptic modulus outside the admissible interval (0, k1(L, delta))."""


class RootNotFoundError(ILWError, RuntimeError):
    """A bracketing root search found no sign change."""


class SingularityError(ILWError, ArithmeticError):
    """A linear system is numerically singular."""


class NumericalError(ILWError, ArithmeticError):
    """An iterative method failed to converge."""


class PF2PreconditionError(ILWError):
    """The Galilean-shifted wave is not strictly positive."""


class WindowError(ILWError, IndexError):
    """A PF(2) window needs sequence values that were not supplied."""


class BlowUpError(ILWError, FloatingPointError):
    """Time integration produced non-finite values.

    The last finite state is kept on ``last_state``.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
