import itertools
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .. import current_config, logger
from ..models import LatticeOperator, LatticeSpace


@dataclass(frozen=True)
class NormBounds:
    lower: float
    upper: Optional[float]
    exact: bool
    method: str

    @property
    def best(self) -> float:
        """The exact value when known, else the certified lower bound."""
        return self.upper if self.exact else self.lower

    @property
    def certified_upper(self) -> float:
        return self.upper if self.upper is not None else self.lower

    def serialize(self):
        return {"lower": self.lower, "upper": self.upper, "exact": self.exact, "method": self.method}


class OperatorNormService:
    @staticmethod
    def reduce_weights(T: LatticeOperator) -> LatticeOperator:
        """
        Rescale coordinates so both spaces become unweighted with the same exponents.
        ‖T‖ is unchanged: T̃ = diag(v^(1/q)) T diag(w^(-1/p)).
        """
        M = T.matrix
        domain, codomain = T.domain, T.codomain
        if domain.is_weighted:
            M = M * (domain.weights ** (-1.0 / domain.p))[None, :]
            domain = LatticeSpace.lp(domain.dim, domain.p)
        if codomain.is_weighted:
            M = M * (codomain.weights ** (1.0 / codomain.p))[:, None]
            codomain = LatticeSpace.lp(codomain.dim, codomain.p)
        return LatticeOperator(domain, codomain, M)

    @staticmethod
    def triangle_bound(T: LatticeOperator) -> float:
        """‖T‖ ≤ ‖(‖Tδ_i‖)_i‖_{E*}; equality for positive T into an L1-type space."""
        return float(T.domain.dual_norm(T.column_norms()))

    @staticmethod
    def interpolation_bound(T: LatticeOperator) -> Optional[float]:
        """
        ‖|T|‖_{1→1}^{1/q} ‖|T|‖_{∞→∞}^{1/q'} for domain exponent p ≤ codomain exponent q < ∞.

        Returns:
            float or None: None when the exponents do not allow the bound
        """
        R = OperatorNormService.reduce_weights(T)
        p, q = R.domain.p, R.codomain.p
        if math.isinf(q) or p > q:
            return None
        A = np.abs(R.matrix)
        one_one = float(A.sum(axis=0).max())
        inf_inf = float(A.sum(axis=1).max())
        if q == 1:
            return one_one
        return one_one ** (1.0 / q) * inf_inf ** (1.0 - 1.0 / q)

    @staticmethod
    def exact_norm(T: LatticeOperator) -> Optional[Tuple[float, str]]:
        """
        Closed-form or finitely enumerable operator norms.

        Returns:
            (value, method) or None when no exact rule applies
        """
        config = current_config()
        R = OperatorNormService.reduce_weights(T)
        M = R.matrix
        p, q = R.domain.p, R.codomain.p
        positive = R.is_positive()

        if p == 1:
            return float(R.column_norms().max()), 'l1_domain_columns'
        if math.isinf(q):
            return float(R.domain.dual_norms(M).max()), 'sup_codomain_rows'
        if math.isinf(p) and positive:
            return float(R.codomain.norm(M.sum(axis=1))), 'sup_domain_unit'
        if q == 1 and positive:
            return float(R.domain.dual_norm(M.sum(axis=0))), 'l1_codomain_column_sums'
        if p == 2 and q == 2:
            return float(np.linalg.norm(M, 2)), 'spectral'
        if math.isinf(p) and R.n <= config.SIGN_ENUMERATION_LIMIT:
            signs = _sign_vertices(R.n)
            return float(R.codomain.norms(signs @ M.T).max()), 'sign_vertices'
        if q == 1 and R.m <= config.SIGN_ENUMERATION_LIMIT:
            signs = _sign_vertices(R.m)
            return float(R.domain.dual_norms(signs @ M).max()), 'dual_sign_vertices'
        return None

    @staticmethod
    def lower_bound_search(T: LatticeOperator, budget: int, seed: int = 0) -> Tuple[float, np.ndarray]:
        """
        Nonlinear power iteration x ← E.dual_norming_vector(Tᵀ F.norming_functional(Tx)).
        Each step does not decrease ‖Tx‖/‖x‖. Starts from every atom and from seeded random points.
        """
        R = OperatorNormService.reduce_weights(T)
        rng = np.random.default_rng(seed)
        positive = R.is_positive()
        starts = [np.eye(R.n)[i] for i in np.argsort(-R.column_norms(), kind='stable')[:8]]
        for _ in range(4):
            z = rng.standard_normal(R.n)
            starts.append(np.abs(z) if positive else z)

        best_value, best_x = 0.0, starts[0]
        for x in starts:
            value, x = _power_iterate(R, x, budget)
            if value > best_value:
                best_value, best_x = value, x

        # map the witness back to the original weighted coordinates
        if T.domain.is_weighted:
            best_x = best_x * T.domain.weights ** (-1.0 / T.domain.p)
        return best_value, best_x

    @staticmethod
    def operator_norm(T: LatticeOperator, budget: Optional[int] = None, seed: int = 0) -> NormBounds:
        """
        Lower and upper bounds on ‖T‖.

        Args:
            T: The operator
            budget: Power-iteration steps per start; defaults to NORM_SEARCH_BUDGET
            seed: Seed for the random starts

        Returns:
            NormBounds: lower == upper with exact=True when a closed form applies
        """
        budget = budget or current_config().NORM_SEARCH_BUDGET
        exact = OperatorNormService.exact_norm(T)
        if exact is not None:
            value, method = exact
            logger.debug(f"Exact operator norm {value:.6g} via {method}")
            return NormBounds(lower=value, upper=value, exact=True, method=method)

        lower, _ = OperatorNormService.lower_bound_search(T, budget, seed)
        uppers = [OperatorNormService.triangle_bound(T)]
        interpolation = OperatorNormService.interpolation_bound(T)
        if interpolation is not None:
            uppers.append(interpolation)
        upper = max(min(uppers), lower)
        logger.debug(f"Operator norm in [{lower:.6g}, {upper:.6g}]")
        return NormBounds(lower=lower, upper=upper, exact=False, method='power_iteration')


def _sign_vertices(k: int) -> np.ndarray:
    # s and -s give the same norm, so fix the first sign
    if k == 1:
        return np.ones((1, 1))
    rest = np.array(list(itertools.product((1.0, -1.0), repeat=k - 1))).reshape(-1, k - 1)
    return np.hstack([np.ones((rest.shape[0], 1)), rest])


def _power_iterate(R: LatticeOperator, x: np.ndarray, budget: int) -> Tuple[float, np.ndarray]:
    E, F = R.domain, R.codomain
    x = x / E.norm(x)
    Tx = R.matrix @ x
    value = F.norm(Tx)
    for _ in range(budget):
        if value == 0:
            break
        g = R.matrix.T @ F.norming_functional(Tx)
        if not np.any(g):
            break
        x_next = E.dual_norming_vector(g)
        Tx_next = R.matrix @ x_next
        value_next = F.norm(Tx_next)
        if value_next <= value * (1.0 + 1e-12):
            if value_next > value:
                x, Tx, value = x_next, Tx_next, value_next
            break
        x, Tx, value = x_next, Tx_next, value_next
    return float(value), x
