import enum
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .operator import LatticeOperator
from ..utils.exceptions import DimensionError


class ApproxMethod(enum.Enum):
    PHI_N = 'phi_n'
    TRUNCATION = 'truncation'
    THRESHOLD = 'threshold'
    ASSIGNMENT = 'assignment'
    POWER_PIPELINE = 'power_pipeline'


@dataclass(frozen=True)
class SupportAssignment:
    """
    owner[t] = i + 1 when codomain coordinate t belongs to column i, 0 when dropped.
    """
    owner: Tuple[int, ...]

    @classmethod
    def from_columns(cls, columns, m: int) -> 'SupportAssignment':
        """Build from 0-based column indices, with -1 meaning dropped."""
        columns = np.asarray(columns, dtype=int)
        if columns.shape != (m,):
            raise DimensionError(f"Assignment needs {m} entries, got {columns.shape}")
        return cls(tuple(int(c) + 1 for c in columns))

    @property
    def m(self) -> int:
        return len(self.owner)

    def columns(self) -> np.ndarray:
        """0-based column per coordinate, -1 for dropped."""
        return np.asarray(self.owner, dtype=int) - 1

    def sets(self, n: int) -> List[frozenset]:
        cols = self.columns()
        return [frozenset(np.flatnonzero(cols == i).tolist()) for i in range(n)]

    def mask(self, n: int) -> np.ndarray:
        """Boolean m×n ownership matrix."""
        cols = self.columns()
        return cols[:, None] == np.arange(n)[None, :]

    def validate_for(self, n: int, m: int):
        if self.m != m:
            raise DimensionError(f"Assignment covers {self.m} coordinates, operator has {m}")
        if any(o < 0 or o > n for o in self.owner):
            raise DimensionError(f"Assignment owners must lie in 0..{n}")

    def serialize(self):
        return {"owner": list(self.owner)}


@dataclass
class ApproxResult:
    S: LatticeOperator
    distance: float
    bound: Optional[float]
    dominated: bool
    method: ApproxMethod
    eps_used: Optional[float] = None
    distance_exact: bool = True
    certified: bool = True
    assignment: Optional[SupportAssignment] = None
    certificates: dict = field(default_factory=dict)

    def serialize(self):
        return {
            "S": self.S.serialize(),
            "distance": self.distance,
            "bound": self.bound,
            "eps_used": self.eps_used,
            "method": self.method.value,
            "dominated": self.dominated,
            "distance_exact": self.distance_exact,
            "certified": self.certified,
            "assignment": None if self.assignment is None else list(self.assignment.owner),
            "certificates": dict(self.certificates),
        }
