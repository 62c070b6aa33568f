from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


@dataclass
class CheckReport:
    """
    Outcome of one inequality or counterexample check.

    `values` holds the named sides of the inequality; `holds` is None when the check
    could not be certified (for example a heuristic standing in for an enumeration).
    """
    name: str
    holds: Optional[bool]
    values: Dict[str, Any] = field(default_factory=dict)
    instance: str = ''
    exact: bool = True

    def serialize(self):
        return {
            "check": self.name,
            "holds": self.holds,
            "instance": self.instance,
            "exact": self.exact,
            **{k: to_plain(v) for k, v in self.values.items()},
        }


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    rows: List[Dict[str, Any]] = field(default_factory=list)
    timing: Optional[float] = None

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row.get("holds") is False]

    def serialize(self, include_timing: bool = False):
        data = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "rows": [{k: to_plain(v) for k, v in row.items()} for row in self.rows],
        }
        if include_timing:
            data["timing"] = self.timing
        return data


@dataclass(frozen=True)
class SphereNet:
    """Points (x_j, y_j) on x^q + y^q = 1, ordered from (1, 0) to (0, 1)."""
    q: float
    N: int
    points: Tuple[Tuple[float, float], ...]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.points, dtype=float)

    def serialize(self):
        return {"q": self.q, "N": self.N, "points": [list(pt) for pt in self.points]}


def to_plain(value):
    """Convert numpy scalars and arrays to JSON-friendly Python values."""
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    return value


@dataclass(frozen=True)
class SplitExpectation:
    """E_S min(Σ_S b, Σ_Sᶜ b); stderr is set for Monte-Carlo estimates."""
    value: float
    exact: bool
    stderr: Optional[float] = None
    samples: Optional[int] = None

    def serialize(self):
        return {"value": self.value, "exact": self.exact, "stderr": self.stderr, "samples": self.samples}
