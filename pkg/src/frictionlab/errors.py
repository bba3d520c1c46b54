"""Exception hierarchy.

Numerical failures derive from :class:`NumericalError` (CLI exit code 3);
configuration problems raise :class:`ConfigError` (exit code 2).
"""


class FrictionLabError(Exception):
    """Base class for all package errors."""


class ConfigError(FrictionLabError, ValueError):
    pass


class NumericalError(FrictionLabError, ArithmeticError):
    pass


class InfraredSingularError(NumericalError):
    """Pointwise evaluation at k = 0 where the coupling is singular."""


class QuadratureNotConverged(NumericalError):
    pass


class InsufficientDataError(NumericalError):
    pass


class BlowUpError(NumericalError):
    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class TransientNotSettled(NumericalError):
    pass


class DimensionCapExceeded(NumericalError):
    pass


class EigensolverError(NumericalError):
    pass


class CouplingRegimeError(NumericalError):
    """Coupling too large for the small-coupling positivity argument."""


class EpsilonUnderResolved(NumericalError):
    pass
