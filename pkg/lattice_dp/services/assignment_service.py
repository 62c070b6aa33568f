"""
Support assignments of codomain coordinates to the columns of an operator.

An assignment A induces the DP operator S_A whose column i is f_i restricted to A_i. For a
positive T into an L1-type space ‖T − S_A‖ is the dual norm of the residual column norms,
which is what the enumeration and the alternating heuristic minimize.
"""
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .. import current_config, logger
from ..models import LatticeOperator, SupportAssignment
from ..utils.exceptions import InstanceTooLargeError
from ..utils.helpers import chunked, mixed_radix_digits, parallel_map, spawn_rngs
from ..utils.validators import require_l1_type

Reducer = Callable[[np.ndarray], np.ndarray]

# cells per enumeration block (rows × assignments × columns)
_BLOCK_CELLS = 1 << 22


def residual_norms(T: LatticeOperator, assignment: SupportAssignment) -> np.ndarray:
    """‖f_i restricted to A_iᶜ‖ for every column i."""
    assignment.validate_for(T.n, T.m)
    kept = np.where(assignment.mask(T.n), 0.0, T.matrix)
    return T.codomain.norms(kept.T)


def weighted_owners(A: np.ndarray, alpha: np.ndarray) -> np.ndarray:
    """Per row the lowest index maximizing alpha_i·A[t, i]; -1 for rows of A that vanish."""
    scores = A * alpha[None, :]
    columns = np.argmax(scores == scores.max(axis=1, keepdims=True), axis=1)
    return np.where(A.any(axis=1), columns, -1)


def canonical_assignment(T: LatticeOperator, columns) -> SupportAssignment:
    """Assignment from 0-based owners, with coordinates whose owning entry is zero marked dropped."""
    columns = np.asarray(columns, dtype=int)
    owned = columns >= 0
    entries = np.zeros(T.m)
    rows = np.arange(T.m)
    entries[owned] = T.matrix[rows[owned], columns[owned]]
    return SupportAssignment.from_columns(np.where(entries != 0, columns, -1), T.m)


def _contributions(T: LatticeOperator) -> np.ndarray:
    """Per-coordinate residual terms: |f_i(t)| for sup codomains, w_t |f_i(t)|^r otherwise."""
    A = np.abs(T.matrix)
    if T.codomain.is_sup:
        return A
    return T.codomain.weights[:, None] * A ** T.codomain.p


def _batched_residuals(T: LatticeOperator, columns: np.ndarray) -> np.ndarray:
    """Residual norms for a batch of full 0-based assignments, shape (k, n)."""
    mask = columns[:, :, None] == np.arange(T.n)[None, None, :]
    kept = np.where(mask, 0.0, T.matrix[None, :, :])
    return T.codomain.norms(np.swapaxes(kept, 1, 2))


class _HalfEnumerator:
    """Meet-in-the-middle enumeration of all n^m full assignments in lexicographic order."""

    def __init__(self, T: LatticeOperator):
        self.T = T
        self.sup = T.codomain.is_sup
        self.power = T.codomain.p
        C = _contributions(T)
        m1 = T.m // 2
        self.left = self._partials(C[:m1])
        self.right = self._partials(C[m1:])

    def _partials(self, C: np.ndarray) -> np.ndarray:
        n = self.T.n
        k = C.shape[0]
        digits = mixed_radix_digits(np.arange(n ** k), n, k)
        P = np.zeros((digits.shape[0], n))
        for j in range(k):
            keep = digits[:, j][:, None] != np.arange(n)[None, :]
            term = np.where(keep, C[j][None, :], 0.0)
            P = np.maximum(P, term) if self.sup else P + term
        return P

    def _finish(self, R: np.ndarray) -> np.ndarray:
        if self.sup or self.power == 1:
            return R
        return np.maximum(R, 0.0) ** (1.0 / self.power)

    def minimum(self, reducer: Reducer) -> Tuple[float, np.ndarray]:
        n = self.T.n
        K2 = self.right.shape[0]
        rows = max(1, _BLOCK_CELLS // max(1, K2 * n))

        def scan(span):
            block = self.left[span.start:span.stop]
            if self.sup:
                combined = np.maximum(block[:, None, :], self.right[None, :, :])
            else:
                combined = block[:, None, :] + self.right[None, :, :]
            values = reducer(self._finish(combined.reshape(-1, n)))
            k = int(np.argmin(values))
            return float(values[k]), span.start * K2 + k

        best_value, best_index = math.inf, 0
        for value, index in parallel_map(scan, list(chunked(0, self.left.shape[0], rows))):
            if value < best_value:
                best_value, best_index = value, index
        columns = mixed_radix_digits(np.array([best_index]), n, self.T.m)[0]
        return best_value, columns


def _local_search(T: LatticeOperator, reducer: Reducer, columns: np.ndarray,
                  max_rounds: int = 100) -> Tuple[float, np.ndarray]:
    """Single-coordinate reassignment moves until none improves."""
    columns = columns.copy()
    value = float(reducer(_batched_residuals(T, columns[None, :]))[0])
    for _ in range(max_rounds):
        improved = False
        for t in range(T.m):
            trials = np.repeat(columns[None, :], T.n, axis=0)
            trials[:, t] = np.arange(T.n)
            values = reducer(_batched_residuals(T, trials))
            k = int(np.argmin(values))
            if values[k] < value * (1.0 - 1e-12):
                columns, value = trials[k], float(values[k])
                improved = True
        if not improved:
            break
    return value, columns


class AssignmentService:
    @staticmethod
    def assignment_objective(T: LatticeOperator, assignment: SupportAssignment) -> float:
        """
        F(A) = ‖(‖f_i restricted to A_iᶜ‖)_i‖_{E*}; equals ‖T − S_A‖ for positive T.

        Raises:
            IncompatibleNormError: If the codomain is not L1-type
        """
        require_l1_type(T.codomain, "assignment_objective codomain")
        return float(T.domain.dual_norm(residual_norms(T, assignment)))

    @staticmethod
    def optimal_assignment_bruteforce(T: LatticeOperator,
                                      limit: Optional[int] = None) -> Tuple[SupportAssignment, float]:
        """
        Exact minimizer of the assignment objective.

        Only full assignments are enumerated: dropping a coordinate never lowers a residual.
        Ties go to the lexicographically first full assignment.

        Raises:
            IncompatibleNormError: If the codomain is not L1-type
            InstanceTooLargeError: If n^m exceeds the enumeration limit
        """
        require_l1_type(T.codomain, "optimal_assignment_bruteforce codomain")
        limit = current_config().ASSIGNMENT_ENUMERATION_LIMIT if limit is None else limit
        _require_enumerable(T, limit)
        _, columns = _HalfEnumerator(T).minimum(T.domain.dual_norms)
        assignment = canonical_assignment(T, columns)
        value = AssignmentService.assignment_objective(T, assignment)
        logger.info(f"Brute-force assignment over {T.n}^{T.m} candidates: objective {value:.6g}")
        return assignment, value

    @staticmethod
    def alternating_assignment(T: LatticeOperator, max_iters: int = 50, seed: int = 0,
                               restarts: int = 4) -> Tuple[SupportAssignment, float]:
        """
        Alternate between owners and domain weights until the assignment repeats.

        Owners: t goes to the lowest index maximizing α_i |f_i(t)|; rows of T that vanish are
        dropped. Weights: α is the unit vector of E norming the residual vector β. Starts from
        the uniform α and `restarts` seeded random ones; the best objective seen is returned.

        Raises:
            IncompatibleNormError: If the codomain is not L1-type
        """
        require_l1_type(T.codomain, "alternating_assignment codomain")
        E = T.domain
        A = np.abs(T.matrix)
        starts = [np.ones(T.n)]
        for rng in spawn_rngs(seed, restarts):
            starts.append(rng.random(T.n) + 1e-3)

        def run(alpha):
            alpha = alpha / E.norm(alpha)
            seen = set()
            best = (math.inf, None)
            for _ in range(max(1, max_iters)):
                columns = weighted_owners(A, alpha)
                key = tuple(columns.tolist())
                if key in seen:
                    break
                seen.add(key)
                assignment = canonical_assignment(T, columns)
                beta = residual_norms(T, assignment)
                value = float(E.dual_norm(beta))
                if value < best[0]:
                    best = (value, assignment)
                if not np.any(beta):
                    break
                alpha = np.abs(E.dual_norming_vector(beta))
            return best

        best_value, best_assignment = math.inf, None
        for value, assignment in parallel_map(run, starts):
            if value < best_value:
                best_value, best_assignment = value, assignment
        logger.info(f"Alternating assignment: objective {best_value:.6g} from {len(starts)} starts")
        return best_assignment, best_value

    @staticmethod
    def build_dp_from_assignment(T: LatticeOperator, assignment: SupportAssignment,
                                 drop_threshold: float = 0.0) -> LatticeOperator:
        """
        Column i of S is f_i restricted to A_i; columns with ‖f_i‖ < drop_threshold are zeroed.
        """
        assignment.validate_for(T.n, T.m)
        S = np.where(assignment.mask(T.n), T.matrix, 0.0)
        if drop_threshold > 0:
            S[:, T.column_norms() < drop_threshold] = 0.0
        return T.with_matrix(S)

    @staticmethod
    def column_residual_minimum(T: LatticeOperator, limit: Optional[int] = None
                                ) -> Tuple[float, SupportAssignment, bool]:
        """
        min over assignments of max_i ‖f_i restricted to A_iᶜ‖ / ‖δ_i‖.

        Exhaustive when n^m is within the limit; otherwise a greedy assignment improved by
        local search, which is only an upper estimate of the minimum.

        Returns:
            (value, assignment, exhaustive)
        """
        limit = current_config().ASSIGNMENT_ENUMERATION_LIMIT if limit is None else limit
        atoms = T.domain.atom_norms()

        def reducer(R):
            return (R / atoms[None, :]).max(axis=1)

        if T.n ** T.m <= limit:
            value, columns = _HalfEnumerator(T).minimum(reducer)
            exhaustive = True
        else:
            logger.warning(f"Column residual minimum: {T.n}^{T.m} assignments exceed {limit}, using local search")
            greedy = np.argmax(np.abs(T.matrix) / atoms[None, :], axis=1)
            value, columns = _local_search(T, reducer, greedy)
            exhaustive = False
        assignment = canonical_assignment(T, columns)
        value = float(reducer(residual_norms(T, assignment)[None, :])[0])
        return value, assignment, exhaustive


def _require_enumerable(T: LatticeOperator, limit: int):
    if T.n ** T.m > limit:
        raise InstanceTooLargeError(f"{T.n}^{T.m} assignments exceed the enumeration limit {limit}")
