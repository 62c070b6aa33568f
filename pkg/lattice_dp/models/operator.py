from dataclasses import dataclass
from typing import List

import numpy as np

from .lattice import LatticeSpace, as_vector
from ..utils.exceptions import DimensionError, InputParseError, ZeroVectorError


@dataclass(eq=False)
class LatticeOperator:
    """
    An m×n real matrix between two lattice spaces; column i is Tδ_i.
    The matrix is stored read-only.
    """
    domain: LatticeSpace
    codomain: LatticeSpace
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2:
            raise DimensionError(f"Operator matrix must be 2-D, got shape {M.shape}")
        if M.shape != (self.codomain.dim, self.domain.dim):
            raise DimensionError(
                f"Matrix shape {M.shape} does not match codomain dim {self.codomain.dim} "
                f"x domain dim {self.domain.dim}"
            )
        if not np.all(np.isfinite(M)):
            raise InputParseError("Operator entries must be finite reals")
        M.setflags(write=False)
        self.matrix = M

    @property
    def n(self) -> int:
        return self.domain.dim

    @property
    def m(self) -> int:
        return self.codomain.dim

    def apply(self, x) -> np.ndarray:
        return self.matrix @ self.domain.vector(x)

    def apply_rows(self, X: np.ndarray) -> np.ndarray:
        """Apply T to every row of X."""
        return np.asarray(X, dtype=float) @ self.matrix.T

    def column(self, i: int) -> np.ndarray:
        return self.matrix[:, i].copy()

    def columns(self) -> np.ndarray:
        """Columns as rows: shape (n, m)."""
        return self.matrix.T.copy()

    def column_norms(self) -> np.ndarray:
        return self.codomain.norms(self.matrix.T)

    def is_positive(self) -> bool:
        return bool(np.all(self.matrix >= 0))

    def modulus(self) -> 'LatticeOperator':
        return self.with_matrix(np.abs(self.matrix))

    def with_matrix(self, matrix) -> 'LatticeOperator':
        return LatticeOperator(self.domain, self.codomain, matrix)

    def scaled(self, factor: float) -> 'LatticeOperator':
        return self.with_matrix(factor * self.matrix)

    def minus(self, other: 'LatticeOperator') -> 'LatticeOperator':
        if other.matrix.shape != self.matrix.shape:
            raise DimensionError("Operators have different shapes")
        return self.with_matrix(self.matrix - other.matrix)

    def column_supports(self) -> List[frozenset]:
        return [frozenset(np.flatnonzero(self.matrix[:, i]).tolist()) for i in range(self.n)]

    def is_dp(self) -> bool:
        """Columns have pairwise disjoint supports."""
        return bool(np.all((self.matrix != 0).sum(axis=1) <= 1))

    def dominated_by(self, other: 'LatticeOperator') -> bool:
        """0 ≤ self ≤ other entrywise."""
        return bool(np.all(self.matrix >= 0) and np.all(self.matrix <= other.matrix))

    def serialize(self):
        return {
            "domain": self.domain.serialize(),
            "codomain": self.codomain.serialize(),
            "matrix": self.matrix.tolist(),
        }

    def __repr__(self):
        return f"<LatticeOperator {self.domain!r} -> {self.codomain!r}>"


def modulus(T: LatticeOperator) -> LatticeOperator:
    return T.modulus()


def identity(space: LatticeSpace) -> LatticeOperator:
    return LatticeOperator(space, space, np.eye(space.dim))


def unit_vector(dim: int, i: int) -> np.ndarray:
    e = np.zeros(dim)
    e[i] = 1.0
    return e


def indicator(dim: int, indices) -> np.ndarray:
    u = np.zeros(dim)
    u[list(indices)] = 1.0
    return u


def normalized(space: LatticeSpace, x) -> np.ndarray:
    x = as_vector(x, space.dim)
    nx = space.norm(x)
    if nx == 0:
        raise ZeroVectorError("Cannot normalize the zero vector")
    return x / nx
