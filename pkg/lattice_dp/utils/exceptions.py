"""
Exception hierarchy. Every error carries the CLI exit code it maps to.
"""


class LatticeDPError(Exception):
    """Base class for all lattice-dp errors."""
    exit_code = 1


class InputParseError(LatticeDPError, ValueError):
    """Malformed JSON or invalid parameters."""
    exit_code = 2


class DimensionError(LatticeDPError, ValueError):
    """Vectors, weights or matrices with inconsistent dimensions."""
    exit_code = 3


class IncompatibleNormError(LatticeDPError, ValueError):
    """A method was applied to spaces whose norm kinds it does not support."""
    exit_code = 4


class NotEpsDisjointError(IncompatibleNormError):
    """Two columns exceed eps at the same coordinate."""


class VerificationError(LatticeDPError):
    """A verification suite found a failing instance."""
    exit_code = 1


class CertificationError(VerificationError):
    """A caller-supplied eps is contradicted by a construction's guaranteed bound."""


class ZeroVectorError(InputParseError):
    pass


class NotDisjointError(InputParseError):
    pass


class NegativeInputError(InputParseError):
    pass


class NonPositiveOperatorError(IncompatibleNormError):
    pass


class InstanceTooLargeError(InputParseError):
    pass
