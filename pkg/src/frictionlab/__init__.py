"""Classical and quantum Hamiltonian friction models.

Modules
-------
formfactor : form factors, coupling functions and closed-form scalars
drag : constant-velocity drag, small-velocity power law, v' = -v^k surrogate
classical : Strang-split particle plus membrane dynamics in normal variables
fock : truncated Fock-space fiber Hamiltonian and spectral probes
fgr : Fermi Golden Rule rate, delta-resolved and Lorentzian
cli : command-line experiment runner
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BlowUpError, ConfigError, CouplingRegimeError, DimensionCapExceeded, EigensolverError,
    EpsilonUnderResolved, FrictionLabError, InfraredSingularError, InsufficientDataError,
    NumericalError, QuadratureNotConverged, TransientNotSettled,
)
from .formfactor import FormFactorModel, RadialProfile  # noqa: F401
from .quadrature import QuadratureGrid  # noqa: F401
