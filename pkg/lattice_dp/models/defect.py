import enum
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np


class DefectKind(enum.Enum):
    DP = 'DP'
    MP = 'MP'
    LH = 'LH'
    SDP = 'SDP'
    SMP = 'SMP'
    P_ESTIMATE = 'P_ESTIMATE'


@dataclass(frozen=True)
class DefectCertificate:
    """
    A witness pair and the value it attains. LH witnesses carry a single vector in x.
    """
    x: Tuple[float, ...]
    y: Optional[Tuple[float, ...]]
    value: float

    @classmethod
    def of(cls, x, y, value) -> 'DefectCertificate':
        return cls(
            x=tuple(float(v) for v in np.asarray(x)),
            y=None if y is None else tuple(float(v) for v in np.asarray(y)),
            value=float(value),
        )

    def serialize(self):
        return {"x": list(self.x), "y": None if self.y is None else list(self.y)}


@dataclass(frozen=True)
class FamilyWitness:
    vectors: Tuple[Tuple[float, ...], ...]
    value: float

    @classmethod
    def of(cls, vectors, value) -> 'FamilyWitness':
        return cls(
            vectors=tuple(tuple(float(v) for v in row) for row in np.asarray(vectors)),
            value=float(value),
        )

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vectors, dtype=float)

    def serialize(self):
        return {"family": [list(v) for v in self.vectors]}


@dataclass
class DefectEstimate:
    """
    A certified lower bound on a defect, recomputable from its witness.

    analytic_upper, when present, is a proven upper bound and `provenance` says where it comes from.
    `on_modulus` records that a positive-only search ran on |T| because T had negative entries.
    """
    kind: DefectKind
    lower_bound: float
    witness: Optional[Union[DefectCertificate, FamilyWitness]] = None
    analytic_upper: Optional[float] = None
    provenance: str = ''
    on_modulus: bool = False
    exhaustive: bool = False
    extras: dict = field(default_factory=dict)

    def serialize(self):
        return {
            "kind": self.kind.value,
            "lower_bound": self.lower_bound,
            "witness": None if self.witness is None else self.witness.serialize(),
            "analytic_upper": self.analytic_upper,
            "provenance": self.provenance,
            "on_modulus": self.on_modulus,
            "exhaustive": self.exhaustive,
            "extras": dict(self.extras),
        }
