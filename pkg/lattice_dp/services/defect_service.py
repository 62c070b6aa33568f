from itertools import islice
from typing import Iterable, List, Optional

import numpy as np

from .. import current_config, logger
from ..models import (
    CheckReport,
    DefectCertificate,
    DefectEstimate,
    DefectKind,
    FamilyWitness,
    LatticeOperator,
    parse_exponent,
    p_sum,
)
from ..utils.exceptions import InputParseError
from ..utils.helpers import parallel_map, set_partitions, thread_count
from ..utils.validators import (
    require_disjoint,
    require_disjoint_family,
    require_nonnegative,
    require_nonzero,
    require_positive_operator,
)
from .operator_norm_service import OperatorNormService
from .pair_search import PairSearch, rank_splits

PARTITION_CHUNK = 2048


def dp_objective(T: LatticeOperator, matrix: Optional[np.ndarray] = None):
    """Batched ‖|Tx| ∧ |Ty|‖ / max(‖x‖, ‖y‖) over rows of X and Y."""
    M = T.matrix if matrix is None else matrix
    E, F = T.domain, T.codomain

    def objective(X, Y):
        meet = np.minimum(np.abs(X @ M.T), np.abs(Y @ M.T))
        return F.norms(meet) / np.maximum(E.norms(X), E.norms(Y))
    return objective


def mp_objective(T: LatticeOperator):
    M = T.matrix
    E, F = T.domain, T.codomain

    def objective(X, Y):
        gap = np.minimum(X @ M.T, Y @ M.T) - np.minimum(X, Y) @ M.T
        return F.norms(gap) / np.maximum(E.norms(X), E.norms(Y))
    return objective


def lh_objective(T: LatticeOperator):
    """x = X − Y; ‖ |T|x|| − |Tx| ‖ / ‖x‖."""
    M = T.matrix
    E, F = T.domain, T.codomain

    def objective(X, Y):
        absolute = np.abs(X) + np.abs(Y)
        gap = np.abs(absolute @ M.T) - np.abs((X - Y) @ M.T)
        return F.norms(gap) / E.norms(absolute)
    return objective


def p_estimate_objective(T: LatticeOperator, p: float):
    M = T.matrix
    E, F = T.domain, T.codomain

    def objective(X, Y):
        lhs = _rowwise_p_sum(np.abs(X), np.abs(Y), p) @ M.T
        rhs = _rowwise_p_sum(np.abs(X @ M.T), np.abs(Y @ M.T), p)
        return F.norms(lhs - rhs) / (E.norms(X) + E.norms(Y))
    return objective


def _rowwise_p_sum(A, B, p):
    if np.isinf(p):
        return np.maximum(A, B)
    if p == 1:
        return A + B
    scale = np.maximum(A, B)
    safe = np.where(scale > 0, scale, 1.0)
    return scale * ((A / safe) ** p + (B / safe) ** p) ** (1.0 / p)


class DefectService:
    @staticmethod
    def pairwise_dp_value(T: LatticeOperator, x, y) -> float:
        """
        ‖|Tx| ∧ |Ty|‖_F / max(‖x‖_E, ‖y‖_E) for disjoint nonzero x, y.

        Raises:
            NotDisjointError: If x and y share a coordinate
            ZeroVectorError: If either input is zero
        """
        x = T.domain.vector(x)
        y = T.domain.vector(y)
        require_disjoint(x, y)
        require_nonzero(T.domain, x, "x")
        require_nonzero(T.domain, y, "y")
        meet = np.minimum(np.abs(T.apply(x)), np.abs(T.apply(y)))
        return T.codomain.norm(meet) / max(T.domain.norm(x), T.domain.norm(y))

    @staticmethod
    def mp_defect(T: LatticeOperator, x, y) -> float:
        """‖(Tx) ∧ (Ty) − T(x ∧ y)‖ for positive T and positive x, y in the unit ball."""
        require_positive_operator(T, "mp_defect")
        x = T.domain.vector(x)
        y = T.domain.vector(y)
        require_nonnegative(x, "x")
        require_nonnegative(y, "y")
        tol = 1.0 + current_config().REL_TOL
        if T.domain.norm(x) > tol or T.domain.norm(y) > tol:
            raise InputParseError("mp_defect expects inputs of norm at most 1")
        gap = np.minimum(T.apply(x), T.apply(y)) - T.apply(np.minimum(x, y))
        return T.codomain.norm(gap)

    @staticmethod
    def lh_defect(T: LatticeOperator, x) -> float:
        """‖ |T|x|| − |Tx| ‖ / ‖x‖."""
        x = T.domain.vector(x)
        require_nonzero(T.domain, x, "x")
        gap = np.abs(T.apply(np.abs(x))) - np.abs(T.apply(x))
        return T.codomain.norm(gap) / T.domain.norm(x)

    @staticmethod
    def sdp_defect(T: LatticeOperator, family) -> float:
        """‖Σ|Tx_i| − ∨|Tx_i|‖ over a mutually disjoint family in the unit ball."""
        V = np.atleast_2d(np.asarray(family, dtype=float))
        require_disjoint_family(V)
        if np.any(T.domain.norms(V) > 1.0 + current_config().REL_TOL):
            raise InputParseError("sdp_defect expects family members of norm at most 1")
        images = np.abs(T.apply_rows(V))
        return T.codomain.norm(images.sum(axis=0) - images.max(axis=0))

    @staticmethod
    def smp_defect(T: LatticeOperator, family) -> float:
        """‖T(∨x_i) − ∨Tx_i‖ for positive T and positive x_i in the unit ball."""
        require_positive_operator(T, "smp_defect")
        V = np.atleast_2d(np.asarray(family, dtype=float))
        require_nonnegative(V, "family")
        if np.any(T.domain.norms(V) > 1.0 + current_config().REL_TOL):
            raise InputParseError("smp_defect expects family members of norm at most 1")
        return T.codomain.norm(T.apply(V.max(axis=0)) - T.apply_rows(V).max(axis=0))

    @staticmethod
    def p_estimate_defect(T: LatticeOperator, x, y, p) -> float:
        """‖T(|x|^p + |y|^p)^(1/p) − (|Tx|^p + |Ty|^p)^(1/p)‖ / (‖x‖ + ‖y‖) for positive T."""
        require_positive_operator(T, "p_estimate_defect")
        p = parse_exponent(p)
        x = T.domain.vector(x)
        y = T.domain.vector(y)
        denominator = T.domain.norm(x) + T.domain.norm(y)
        if denominator == 0:
            return 0.0
        gap = T.apply(p_sum(x, y, p)) - p_sum(T.apply(x), T.apply(y), p)
        return T.codomain.norm(gap) / denominator

    # searches

    @staticmethod
    def _dp_upper(T: LatticeOperator, norm_seed: int = 0):
        if T.is_dp():
            return 0.0, "columns have disjoint supports"
        upper = OperatorNormService.operator_norm(T, seed=norm_seed).certified_upper
        return upper, "operator norm bound: ‖|Tx| ∧ |Ty|‖ ≤ ‖Tx‖"

    @staticmethod
    def indicator_split_defect(T: LatticeOperator, exhaustive_limit: int = 20, seed: int = 0,
                               samples: Optional[int] = None) -> DefectEstimate:
        """
        Best split of the atoms into two normalized indicators.

        Args:
            T: Operator; replaced by |T| when it has negative entries
            exhaustive_limit: Enumerate all splits up to this many atoms
            seed: Seed for sampled splits beyond the limit
            samples: Number of sampled splits

        Returns:
            DefectEstimate: DP lower bound with the best indicator pair
        """
        on_modulus = not T.is_positive()
        op = T.modulus() if on_modulus else T
        if on_modulus:
            logger.info("indicator_split_defect: operator has negative entries, using its modulus")

        samples = samples or 64 * current_config().SEARCH_RESTARTS
        ranking = rank_splits(op.domain, dp_objective(op), seed, exhaustive_limit, samples)
        if ranking is None:
            return DefectEstimate(DefectKind.DP, 0.0, None, 0.0, "a single atom has no disjoint partner",
                                  on_modulus=on_modulus, exhaustive=True)

        k = int(np.argmax(ranking.values))
        b = ranking.splits[k].astype(float)
        x = b / op.domain.norm(b)
        y = (1.0 - b) / op.domain.norm(1.0 - b)
        value = DefectService.pairwise_dp_value(op, x, y)
        upper, provenance = DefectService._dp_upper(op, seed)
        logger.info(f"Indicator split defect {value:.6g} over {op.n} atoms (exhaustive={ranking.exhaustive})")
        return DefectEstimate(
            kind=DefectKind.DP,
            lower_bound=value,
            witness=DefectCertificate.of(x, y, value),
            analytic_upper=upper,
            provenance=provenance,
            on_modulus=on_modulus,
            exhaustive=ranking.exhaustive,
        )

    @staticmethod
    def dp_defect_search(T: LatticeOperator, seed: int = 0, restarts: Optional[int] = None,
                         positive_only: bool = False) -> DefectEstimate:
        """
        Maximize the DP quotient over disjoint pairs with general coefficients.

        For operators with negative entries, splits are ranked on |T| and coefficient signs are
        proposed from the rows of T carrying the largest meet, unless positive_only is set.
        """
        if T.n < 2:
            return DefectEstimate(DefectKind.DP, 0.0, None, 0.0, "a single atom has no disjoint partner")

        objective = dp_objective(T)
        if T.is_positive() or positive_only:
            search = PairSearch(T.domain, objective)
        else:
            A = np.abs(T.matrix)
            search = PairSearch(T.domain, objective, rank_objective=dp_objective(T, A),
                                sign_proposer=_row_sign_proposer(T))

        best = search.run(seed=seed, restarts=restarts)
        value = DefectService.pairwise_dp_value(T, best.x, best.y)
        upper, provenance = DefectService._dp_upper(T, seed)
        logger.info(f"DP defect search: lower bound {value:.6g}")
        return DefectEstimate(
            kind=DefectKind.DP,
            lower_bound=value,
            witness=DefectCertificate.of(best.x, best.y, value),
            analytic_upper=upper,
            provenance=provenance,
            exhaustive=False,
            extras={"positive_only": positive_only},
        )

    @staticmethod
    def mp_defect_search(T: LatticeOperator, seed: int = 0, restarts: Optional[int] = None) -> DefectEstimate:
        """
        Search positive pairs for the MP defect.

        Only disjoint pairs are searched: for positive T, (a + c) ∧ (b + c) = a ∧ b + c, so an
        overlapping pair x, y has the MP value of its disjoint parts x − x ∧ y, y − x ∧ y at no
        larger norm. On disjoint positive pairs the MP and DP quotients coincide.
        """
        on_modulus = not T.is_positive()
        op = T.modulus() if on_modulus else T
        if on_modulus:
            logger.info("mp_defect_search: operator has negative entries, using its modulus")
        if op.n < 2:
            return DefectEstimate(DefectKind.MP, 0.0, None, 0.0, "a single atom has no disjoint partner",
                                  on_modulus=on_modulus)

        best = PairSearch(op.domain, mp_objective(op)).run(seed=seed, restarts=restarts)
        x, y = best.x, best.y
        value = DefectService.mp_defect(op, x, y)
        upper, provenance = DefectService._dp_upper(op, seed)
        return DefectEstimate(
            kind=DefectKind.MP,
            lower_bound=value,
            witness=DefectCertificate.of(x, y, value),
            analytic_upper=upper,
            provenance=provenance,
            on_modulus=on_modulus,
        )

    @staticmethod
    def lh_defect_search(T: LatticeOperator, seed: int = 0, restarts: Optional[int] = None) -> DefectEstimate:
        """Maximize ‖ |T|x|| − |Tx| ‖ / ‖x‖ over x = X − Y with X, Y ≥ 0 disjoint."""
        if T.n < 2:
            return DefectEstimate(DefectKind.LH, 0.0, None, 0.0, "every vector is a multiple of one atom")

        best = PairSearch(T.domain, lh_objective(T)).run(seed=seed, restarts=restarts)
        x = best.x - best.y
        value = DefectService.lh_defect(T, x)

        if T.is_positive() and T.is_dp():
            upper, provenance = 0.0, "positive disjointness preserving operators are lattice homomorphisms"
        else:
            norm_upper = OperatorNormService.operator_norm(T, seed=seed).certified_upper
            upper, provenance = 2.0 * norm_upper, "2‖T‖ (triangle inequality)"
        return DefectEstimate(
            kind=DefectKind.LH,
            lower_bound=value,
            witness=DefectCertificate.of(x, None, value),
            analytic_upper=upper,
            provenance=provenance,
        )

    @staticmethod
    def p_estimate_search(T: LatticeOperator, p, seed: int = 0, restarts: Optional[int] = None) -> DefectEstimate:
        """Lower bound on the p-estimate defect over disjoint positive pairs."""
        require_positive_operator(T, "p_estimate_search")
        p = parse_exponent(p)
        if T.n < 2:
            return DefectEstimate(DefectKind.P_ESTIMATE, 0.0, None, None, "", extras={"p": p})
        best = PairSearch(T.domain, p_estimate_objective(T, p)).run(seed=seed, restarts=restarts)
        value = DefectService.p_estimate_defect(T, best.x, best.y, p)
        return DefectEstimate(
            kind=DefectKind.P_ESTIMATE,
            lower_bound=value,
            witness=DefectCertificate.of(best.x, best.y, value),
            extras={"p": 'inf' if np.isinf(p) else p},
        )

    @staticmethod
    def sdp_atom_defect(T: LatticeOperator, exhaustive_limit: Optional[int] = None) -> DefectEstimate:
        """
        SDP defect over families of normalized block indicators.

        All set partitions of the atoms are tried up to exhaustive_limit atoms; beyond it the
        canonical atom family and every single merge of two atoms. A block image is at most the
        sum of its atoms' images in every row, so the atom family always attains the maximum.
        """
        limit = current_config().SDP_EXHAUSTIVE_LIMIT if exhaustive_limit is None else exhaustive_limit
        n = T.n
        exhaustive = n <= limit
        partitions = set_partitions(n) if exhaustive else _atom_merges(n)
        best_family = _block_family(T, _best_partition(T, partitions))
        best_value = DefectService.sdp_defect(T, best_family)

        if T.is_dp():
            upper, provenance = 0.0, "columns have disjoint supports"
        elif T.domain.is_sup:
            upper = OperatorNormService.operator_norm(T.modulus()).certified_upper
            provenance = "‖|T|‖ (sup-norm domain: ‖Σ|x_i|‖ ≤ 1 for disjoint unit vectors)"
        else:
            upper, provenance = None, ""

        extras = {}
        if T.is_positive():
            extras["smp_value"] = DefectService.smp_defect(T, best_family)
        logger.info(f"SDP atom defect {best_value:.6g} over {n} atoms (exhaustive={exhaustive})")
        return DefectEstimate(
            kind=DefectKind.SDP,
            lower_bound=best_value,
            witness=FamilyWitness.of(best_family, best_value),
            analytic_upper=upper,
            provenance=provenance,
            exhaustive=exhaustive,
            extras=extras,
        )

    @staticmethod
    def almost_disjoint_check(T: LatticeOperator, x, y, eps: float):
        """
        ‖|Tx| ∧ |Ty|‖ ≤ 4(eps·max{‖x‖, ‖y‖} + ‖T‖·‖|x| ∧ |y|‖) with ‖T‖ taken from its upper bound.
        """
        x = T.domain.vector(x)
        y = T.domain.vector(y)
        norm_T = OperatorNormService.operator_norm(T).certified_upper
        lhs = T.codomain.norm(np.minimum(np.abs(T.apply(x)), np.abs(T.apply(y))))
        overlap = T.domain.norm(np.minimum(np.abs(x), np.abs(y)))
        rhs = 4.0 * (eps * max(T.domain.norm(x), T.domain.norm(y)) + norm_T * overlap)
        holds = lhs <= rhs * (1.0 + 1e-12) + 1e-12
        return CheckReport("almost_disjoint", holds, {"lhs": lhs, "rhs": rhs, "slack": rhs - lhs, "eps": eps})


def _row_sign_proposer(T: LatticeOperator, rows: int = 3):
    A = np.abs(T.matrix)
    M = T.matrix

    def propose(b: np.ndarray) -> List[np.ndarray]:
        u = b.astype(float)
        meet = np.minimum(A @ u, A @ (1.0 - u))
        proposals = [np.ones(b.size)]
        for t in np.argsort(-meet, kind='stable')[:rows]:
            signs = np.where(M[t] < 0, -1.0, 1.0)
            if not any(np.array_equal(signs, s) for s in proposals):
                proposals.append(signs)
        return proposals
    return propose


def _atom_merges(n: int):
    yield list(range(n))
    for i in range(n):
        for j in range(i + 1, n):
            labels = list(range(n))
            labels[j] = i
            yield labels


def _block_family(T: LatticeOperator, labels) -> np.ndarray:
    labels = np.asarray(labels)
    blocks = np.unique(labels)
    family = (labels[None, :] == blocks[:, None]).astype(float)
    return family / T.domain.norms(family)[:, None]


def _partition_values(T: LatticeOperator, labels: np.ndarray) -> np.ndarray:
    """SDP values of the normalized block families, one partition per row of labels."""
    k, n = labels.shape
    indicators = (labels[:, None, :] == np.arange(n)[None, :, None]).astype(float)
    norms = T.domain.norms(indicators.reshape(-1, n)).reshape(k, n)
    norms[norms == 0] = 1.0
    images = np.abs((indicators / norms[:, :, None]) @ T.matrix.T)
    return T.codomain.norms(images.sum(axis=1) - images.max(axis=1))


def _best_partition(T: LatticeOperator, partitions: Iterable[List[int]]) -> np.ndarray:
    """First partition of maximal SDP value, chunks scored on the thread pool."""
    partitions = iter(partitions)
    chunks = iter(lambda: list(islice(partitions, PARTITION_CHUNK)), [])
    best_value, best_labels = -1.0, None
    while True:
        group = [np.asarray(chunk) for chunk in islice(chunks, thread_count())]
        if not group:
            return best_labels
        for labels, values in zip(group, parallel_map(lambda L: _partition_values(T, L), group)):
            k = int(np.argmax(values))
            if values[k] > best_value:
                best_value, best_labels = float(values[k]), labels[k]
