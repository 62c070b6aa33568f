from .exceptions import (
    CertificationError,
    DimensionError,
    IncompatibleNormError,
    InputParseError,
    InstanceTooLargeError,
    LatticeDPError,
    NegativeInputError,
    NonPositiveOperatorError,
    NotDisjointError,
    NotEpsDisjointError,
    VerificationError,
    ZeroVectorError,
)
