import numpy as np

from .exceptions import (
    IncompatibleNormError,
    NegativeInputError,
    NonPositiveOperatorError,
    NotDisjointError,
    ZeroVectorError,
)


def require_positive_operator(T, what: str = "operation"):
    if not T.is_positive():
        raise NonPositiveOperatorError(f"{what} requires a positive operator")


def require_nonnegative(x, name: str = "input"):
    if np.any(np.asarray(x) < 0):
        raise NegativeInputError(f"{name} must be nonnegative")


def require_nonzero(space, x, name: str = "input"):
    if space.norm(x) == 0:
        raise ZeroVectorError(f"{name} must be nonzero")


def require_disjoint(x, y):
    if np.any((np.asarray(x) != 0) & (np.asarray(y) != 0)):
        raise NotDisjointError("Vectors must have disjoint supports")


def require_disjoint_family(vectors):
    V = np.asarray(vectors)
    if V.ndim != 2 or np.any((V != 0).sum(axis=0) > 1):
        raise NotDisjointError("Family members must have pairwise disjoint supports")


def require_sup(space, role: str):
    if not space.is_sup:
        raise IncompatibleNormError(f"{role} must carry the sup norm, got {space!r}")


def require_l1_type(space, role: str):
    if not space.is_l1_type:
        raise IncompatibleNormError(f"{role} must be an L1-type space, got {space!r}")
