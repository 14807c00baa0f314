"""Exception types shared across the package."""


class KGError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KGError, ValueError):
    """An argument lies outside the region where the quantity is defined."""


class PoleError(DomainError):
    """Evaluation at a pole (e.g. the gamma function at a non-positive integer)."""


class ConvergenceError(KGError, ArithmeticError):
    """A series or quadrature did not reach its error target within its budget."""


class ImaginaryResidueError(KGError, ArithmeticError):
    """A quantity that must be real came out with a non-negligible imaginary part."""


class CFLError(KGError, ValueError):
    """The finite-difference time step violates the stability bound."""


class BlowUpError(KGError, ArithmeticError):
    """The finite-difference solution grew beyond the blow-up threshold."""
