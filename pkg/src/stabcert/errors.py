"""Exception hierarchy.

Every certification failure maps to one exception class so that callers
(and the command line front end) can branch on the failure kind.
"""


class StabCertError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class SchemaError(StabCertError, ValueError):
    """A system definition is malformed (bad key, bad shape, bad value)."""

    exit_code = 3


class DimensionError(StabCertError, ValueError):
    """Vector or matrix dimensions do not agree with the system."""

    exit_code = 3


class UncontrollableError(StabCertError):
    """The linearised pair (A, B) is not controllable."""

    exit_code = 10


class CertificationUnsupported(StabCertError):
    """The closed loop is outside what the certificate can handle.

    Raised for repeated or clustered eigenvalues, eigenvalues with
    nonnegative real part, and multi-input systems without a supplied gain.
    """

    exit_code = 11


class CertificationInfeasible(StabCertError):
    """A certificate inequality fails.

    ``inequality`` names the first failing condition in plain text.
    """

    exit_code = 12

    def __init__(self, message, inequality=None, **limits):
        super().__init__(message)
        self.inequality = inequality
        self.limits = limits


class StabilityConditionError(CertificationInfeasible):
    """lambda_m < -eta * (Gamma0 * (1 + ||K||) + sigma) cannot be met."""

    exit_code = 12


class DecayOrderError(CertificationInfeasible):
    """The perturbation decays no faster than the closed loop (gamma >= lambda_m)."""

    exit_code = 13


class DeltaInfeasibleError(CertificationInfeasible):
    """The perturbation amplitude is too large: delta <= 0."""

    exit_code = 14
