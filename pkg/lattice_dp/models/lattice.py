"""
Finite-dimensional Banach lattices with the coordinatewise order.

A space is a dimension plus one of three monotone norms: lp, weighted lp (p finite) and sup.
Vectors are plain float64 numpy arrays; the helpers here validate them on the way in.
"""
import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from ..utils.exceptions import (
    DimensionError,
    IncompatibleNormError,
    InputParseError,
    ZeroVectorError,
)

INF = math.inf


def parse_exponent(value) -> float:
    """Accept a number or the string 'inf' and return a float exponent >= 1."""
    if isinstance(value, str):
        if value.strip().lower() in ('inf', 'infinity', '∞'):
            return INF
        try:
            value = float(value)
        except ValueError:
            raise InputParseError(f"Invalid exponent: {value!r}")
    p = float(value)
    if math.isnan(p) or p < 1:
        raise InputParseError(f"Exponent must be >= 1, got {value}")
    return p


def format_exponent(p: float):
    return 'inf' if math.isinf(p) else p


def conjugate_exponent(p: float) -> float:
    if p == 1:
        return INF
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def as_vector(x, dim: Optional[int] = None) -> np.ndarray:
    """
    Convert input to a finite 1-D float64 vector.

    Args:
        x: Sequence of reals
        dim: Expected dimension, if any

    Returns:
        np.ndarray: The validated vector

    Raises:
        DimensionError: If the vector is empty, not 1-D or has the wrong length
        InputParseError: If an entry is NaN or infinite
    """
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"Expected a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.size != dim:
        raise DimensionError(f"Expected dimension {dim}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InputParseError("Vector entries must be finite reals")
    return arr


class NormKind(enum.Enum):
    LP = 'lp'
    WEIGHTED_LP = 'weighted_lp'
    SUP = 'sup'


@dataclass(frozen=True)
class NormSpec:
    kind: NormKind
    p: float = INF
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        p = parse_exponent(self.p)
        object.__setattr__(self, 'p', p)
        if self.kind is NormKind.SUP:
            if not math.isinf(p) or self.weights is not None:
                raise InputParseError("Sup norm takes neither a finite p nor weights")
        elif self.kind is NormKind.LP:
            if self.weights is not None:
                raise InputParseError("Use weighted_lp for weighted norms")
        else:
            if math.isinf(p):
                raise InputParseError("Weighted norms require a finite p; rescale coordinates for weighted sup")
            if self.weights is None:
                raise InputParseError("weighted_lp requires weights")
            w = tuple(float(v) for v in self.weights)
            if not all(math.isfinite(v) and v > 0 for v in w):
                raise InputParseError("All weights must be positive and finite")
            object.__setattr__(self, 'weights', w)

    @classmethod
    def lp(cls, p) -> 'NormSpec':
        return cls(NormKind.LP, p)

    @classmethod
    def weighted(cls, p, weights: Sequence[float]) -> 'NormSpec':
        return cls(NormKind.WEIGHTED_LP, p, tuple(weights))

    @classmethod
    def sup(cls) -> 'NormSpec':
        return cls(NormKind.SUP)

    @property
    def is_sup(self) -> bool:
        return math.isinf(self.p)

    @property
    def is_l1_type(self) -> bool:
        return self.p == 1

    def serialize(self):
        data = {"kind": self.kind.value, "p": format_exponent(self.p)}
        if self.weights is not None:
            data["weights"] = list(self.weights)
        return data

    def __repr__(self):
        if self.kind is NormKind.SUP:
            return "Sup"
        if self.kind is NormKind.LP:
            return f"L{self.p:g}" if not self.is_sup else "Linf"
        return f"WeightedL{self.p:g}"


@dataclass(frozen=True)
class LatticeSpace:
    dim: int
    norm_spec: NormSpec = field(default_factory=NormSpec.sup)

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DimensionError(f"Dimension must be a positive integer, got {self.dim}")
        if self.norm_spec.weights is not None and len(self.norm_spec.weights) != self.dim:
            raise DimensionError(
                f"Weight list has length {len(self.norm_spec.weights)}, space has dimension {self.dim}"
            )

    @classmethod
    def lp(cls, dim, p) -> 'LatticeSpace':
        return cls(dim, NormSpec.lp(p))

    @classmethod
    def sup(cls, dim) -> 'LatticeSpace':
        return cls(dim, NormSpec.sup())

    @classmethod
    def weighted(cls, p, weights) -> 'LatticeSpace':
        return cls(len(weights), NormSpec.weighted(p, weights))

    @property
    def p(self) -> float:
        return self.norm_spec.p

    @property
    def weights(self) -> np.ndarray:
        if self.norm_spec.weights is None:
            return np.ones(self.dim)
        return np.asarray(self.norm_spec.weights, dtype=float)

    @property
    def is_sup(self) -> bool:
        return self.norm_spec.is_sup

    @property
    def is_l1_type(self) -> bool:
        return self.norm_spec.is_l1_type

    @property
    def is_weighted(self) -> bool:
        return self.norm_spec.kind is NormKind.WEIGHTED_LP

    def vector(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def _check_last_axis(self, X: np.ndarray):
        if X.shape[-1] != self.dim:
            raise DimensionError(f"Expected last axis of length {self.dim}, got {X.shape[-1]}")

    # norms

    def norms(self, X) -> np.ndarray:
        """Norm of every vector stacked along the last axis."""
        X = np.abs(np.asarray(X, dtype=float))
        self._check_last_axis(X)
        if self.is_sup:
            return X.max(axis=-1)
        return _weighted_p_norms(X, self.weights, self.p)

    def norm(self, x) -> float:
        return float(self.norms(self.vector(x)))

    def dual_norms(self, F) -> np.ndarray:
        """Norm of every row of F as a functional on this space."""
        F = np.abs(np.asarray(F, dtype=float))
        self._check_last_axis(F)
        if self.is_sup:
            return F.sum(axis=-1)
        if self.p == 1:
            return (F / self.weights).max(axis=-1)
        q = conjugate_exponent(self.p)
        return _weighted_p_norms(F, self.weights ** (1.0 - q), q)

    def dual_norm(self, f) -> float:
        return float(self.dual_norms(self.vector(f)))

    def dual(self) -> 'LatticeSpace':
        """
        The dual space under the coordinate pairing.

        Raises:
            IncompatibleNormError: For weighted L1, whose dual is a weighted sup norm
        """
        if self.is_sup:
            return LatticeSpace.lp(self.dim, 1)
        if self.is_weighted:
            if self.p == 1:
                raise IncompatibleNormError("The dual of weighted L1 is a weighted sup norm, which is not supported")
            q = conjugate_exponent(self.p)
            return LatticeSpace.weighted(q, self.weights ** (1.0 - q))
        return LatticeSpace.lp(self.dim, conjugate_exponent(self.p))

    def norming_functional(self, x) -> np.ndarray:
        """
        Return z with dual_norm(z) = 1 and <z, x> = norm(x).

        Raises:
            ZeroVectorError: If x is zero
        """
        x = self.vector(x)
        nx = self.norm(x)
        if nx == 0:
            raise ZeroVectorError("Norming functional of the zero vector is undefined")
        if self.is_sup:
            k = int(np.argmax(np.abs(x)))
            z = np.zeros(self.dim)
            z[k] = np.sign(x[k])
            return z
        if self.p == 1:
            return self.weights * np.sign(x)
        ratio = np.abs(x) / nx
        return self.weights * np.sign(x) * ratio ** (self.p - 1.0)

    def dual_norming_vector(self, f) -> np.ndarray:
        """
        Return z in the unit sphere of this space with <z, f> = dual_norm(f).

        Raises:
            ZeroVectorError: If f is zero
        """
        f = self.vector(f)
        if not np.any(f):
            raise ZeroVectorError("Dual norming vector of the zero functional is undefined")
        if self.is_sup:
            return np.sign(f)
        if self.p == 1:
            k = int(np.argmax(np.abs(f) / self.weights))
            z = np.zeros(self.dim)
            z[k] = np.sign(f[k]) / self.weights[k]
            return z
        return self.dual().norming_functional(f)

    def atom_norms(self) -> np.ndarray:
        """Norms of the unit vectors delta_i."""
        if self.is_sup:
            return np.ones(self.dim)
        return self.weights ** (1.0 / self.p)

    def serialize(self):
        return {"dim": self.dim, "norm": self.norm_spec.serialize()}

    def __repr__(self):
        return f"{self.norm_spec!r}({self.dim})"


def _weighted_p_norms(A: np.ndarray, w: np.ndarray, p: float) -> np.ndarray:
    # A >= 0; rescale by the row maximum to keep large p finite
    if p == 1:
        return (A * w).sum(axis=-1)
    if p == 2:
        return np.sqrt((A * A * w).sum(axis=-1))
    scale = A.max(axis=-1, keepdims=True)
    safe = np.where(scale > 0, scale, 1.0)
    inner = ((A / safe) ** p * w).sum(axis=-1)
    return np.squeeze(safe, axis=-1) * inner ** (1.0 / p)


@dataclass(frozen=True)
class LatticeParts:
    absolute: np.ndarray
    meet: np.ndarray
    join: np.ndarray
    pos_part: np.ndarray
    neg_part: np.ndarray


def lattice_ops(x, y) -> LatticeParts:
    """
    Coordinatewise |x|, x ∧ y, x ∨ y, x⁺ and x⁻.

    Raises:
        DimensionError: If x and y differ in dimension
    """
    x = as_vector(x)
    y = as_vector(y, x.size)
    pos = np.maximum(x, 0.0)
    neg = np.maximum(-x, 0.0)
    return LatticeParts(
        absolute=np.abs(x),
        meet=np.minimum(x, y),
        join=np.maximum(x, y),
        pos_part=pos,
        neg_part=neg,
    )


def p_sum(x, y, p) -> np.ndarray:
    """Coordinatewise (|x|^p + |y|^p)^(1/p); max(|x|, |y|) for p = inf."""
    p = parse_exponent(p)
    x = np.abs(as_vector(x))
    y = np.abs(as_vector(y, x.size))
    if math.isinf(p):
        return np.maximum(x, y)
    if p == 1:
        return x + y
    return _weighted_p_norms(np.stack([x, y], axis=-1), np.ones(2), p)


def family_p_sum(vectors: np.ndarray, p) -> np.ndarray:
    """Coordinatewise (Σ_i |x_i|^p)^(1/p) over the rows of `vectors`."""
    p = parse_exponent(p)
    V = np.abs(np.asarray(vectors, dtype=float))
    if math.isinf(p):
        return V.max(axis=0)
    return _weighted_p_norms(V.T, np.ones(V.shape[0]), p)


def is_disjoint(x, y) -> bool:
    x = as_vector(x)
    y = as_vector(y, x.size)
    return not bool(np.any((x != 0) & (y != 0)))


def family_is_disjoint(vectors) -> bool:
    V = np.asarray(vectors, dtype=float)
    return bool(np.all((V != 0).sum(axis=0) <= 1))
