from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from .lattice import format_exponent
from .operator import LatticeOperator


@dataclass(eq=False)
class GraphInstance:
    """
    Complete graph on N+1 vertices: column i is N^(-1/q) times the indicator of the
    edges incident to vertex i. Indices are 0-based.
    """
    N: int
    p: float
    q: float
    edges: List[Tuple[int, int]]
    incidence: List[frozenset]
    operator: LatticeOperator

    @property
    def M(self) -> int:
        return len(self.edges)

    def meta(self) -> Dict:
        return {"kind": "graph", "N": self.N, "p": format_exponent(self.p), "q": format_exponent(self.q)}


@dataclass(eq=False)
class WalshInstance:
    """
    Block-diagonal sum of I + 2^(-i/2) S_i over levels k_min..k_max, S_i the normalized
    Sylvester matrix of order 2^i.
    """
    k_min: int
    k_max: int
    blocks: List[Tuple[int, np.ndarray]]
    operator: LatticeOperator

    @property
    def levels(self) -> List[int]:
        return [level for level, _ in self.blocks]

    def offsets(self) -> List[int]:
        out, start = [], 0
        for level, _ in self.blocks:
            out.append(start)
            start += 2 ** level
        return out

    def block_operator(self, level: int) -> np.ndarray:
        """The matrix I + 2^(-i/2) S_i of one level."""
        for lv, S in self.blocks:
            if lv == level:
                return np.eye(S.shape[0]) + 2.0 ** (-level / 2.0) * S
        raise KeyError(level)

    def meta(self) -> Dict:
        return {"kind": "walsh", "k_min": self.k_min, "k_max": self.k_max}


@dataclass(eq=False)
class PerturbedInstance:
    operator: LatticeOperator
    eps_analytic: float
    base: LatticeOperator
    params: Dict = field(default_factory=dict)

    def meta(self) -> Dict:
        return {"kind": "perturbed", "eps_analytic": self.eps_analytic, **self.params}
