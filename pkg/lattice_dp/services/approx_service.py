import math
from typing import Optional, Sequence

import numpy as np

from .. import current_config, logger
from ..models import ApproxMethod, ApproxResult, LatticeOperator, LatticeSpace
from ..utils.exceptions import (
    CertificationError,
    IncompatibleNormError,
    InputParseError,
    NotEpsDisjointError,
)
from ..utils.validators import require_l1_type, require_positive_operator, require_sup
from .assignment_service import AssignmentService, canonical_assignment
from .operator_norm_service import OperatorNormService

ORACLE_RATIO_WARN = 1.05


def phi_n(t: Sequence[float]) -> float:
    """
    With h = max_{i≥2} |t_i|: 0 if t_1 ≤ h, 2(t_1 − h) if h ≤ t_1 ≤ 2h, t_1 if t_1 > 2h.

    Raises:
        InputParseError: If t is empty
    """
    t = np.asarray(t, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise InputParseError("phi_n needs at least one argument")
    t1 = float(t[0])
    h = float(np.abs(t[1:]).max()) if t.size > 1 else 0.0
    if t1 <= h:
        return 0.0
    if t1 <= 2.0 * h:
        return 2.0 * (t1 - h)
    return t1


def _others_max(A: np.ndarray) -> np.ndarray:
    """h[t, i] = max_{j≠i} A[t, j] for nonnegative A, via the two largest entries of each row."""
    m, n = A.shape
    if n == 1:
        return np.zeros_like(A)
    order = np.argsort(-A, axis=1, kind='stable')
    rows = np.arange(m)
    first = A[rows, order[:, 0]]
    second = A[rows, order[:, 1]]
    is_top = np.arange(n)[None, :] == order[:, :1]
    return np.where(is_top, second[:, None], first[:, None])


def _three_branch(F: np.ndarray, scaled: np.ndarray, cut: np.ndarray, scales: np.ndarray) -> np.ndarray:
    """0 where |scaled| ≤ cut, F where |scaled| ≥ 2·cut, 2(|scaled| − cut)·sign·scale between."""
    a = np.abs(scaled)
    middle = 2.0 * (a - cut) * np.sign(F) * scales
    return np.where(a <= cut, 0.0, np.where(a >= 2.0 * cut, F, middle))


def phi_n_matrix(F: np.ndarray) -> np.ndarray:
    """g_i(t) = phi_n(f_i(t), the other f_j(t) in cyclic order) for every entry of F."""
    F = np.asarray(F, dtype=float)
    h = _others_max(np.abs(F))
    middle = 2.0 * (F - h)
    return np.where(F <= h, 0.0, np.where(F <= 2.0 * h, middle, F))


def truncation_matrix(F: np.ndarray, scales: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Column-wise truncation against the largest competing entry of each row.

    Entries are compared after dividing column i by scales[i]; kept entries are returned unscaled.
    """
    F = np.asarray(F, dtype=float)
    scales = np.ones(F.shape[1]) if scales is None else np.asarray(scales, dtype=float)
    scaled = F / scales[None, :]
    h = _others_max(np.abs(scaled))
    return _three_branch(F, scaled, h, scales[None, :])


def threshold_matrix(F: np.ndarray, eps: float, scales: Optional[np.ndarray] = None) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    scales = np.ones(F.shape[1]) if scales is None else np.asarray(scales, dtype=float)
    scaled = F / scales[None, :]
    return _three_branch(F, scaled, np.full_like(F, eps), scales[None, :])


def _check_bound(result: ApproxResult, what: str, lower: Optional[float] = None) -> bool:
    """
    True when result.distance, an upper value, is within result.bound. With a lower value that
    still meets the bound an excess is inconclusive and only logged.
    """
    if result.bound is None:
        return True
    slack = result.bound * (1.0 + current_config().REL_TOL) + 1e-12
    if result.distance <= slack:
        return True
    message = f"{what}: distance {result.distance:.6g} exceeds the bound {result.bound:.6g}"
    if lower is not None and lower <= slack:
        logger.warning(f"{message} (upper estimate only; the lower estimate {lower:.6g} meets it)")
        return False
    if result.certified:
        logger.error(message)
        raise CertificationError(f"{message}; the supplied eps is not a valid defect bound")
    logger.warning(f"{message} (bound not certified for this input)")
    return False


class ApproxService:
    @staticmethod
    def construct_dp_linfty(T: LatticeOperator, eps: Optional[float] = None) -> ApproxResult:
        """
        DP approximant of a positive operator on a sup-norm domain, column g_i = phi_n(f_i, f_{i+1}, ...).

        The distance never exceeds 2‖Σf_i − ∨f_i‖; with a valid DP defect bound eps it is at most 256·eps.

        Raises:
            NonPositiveOperatorError: If T has a negative entry
            IncompatibleNormError: If the domain is not a sup-norm space
            CertificationError: If either bound is violated
        """
        require_positive_operator(T, "construct_dp_linfty")
        require_sup(T.domain, "construct_dp_linfty domain")
        M = T.matrix
        S = T.with_matrix(phi_n_matrix(M))
        distance = T.codomain.norm((M - S.matrix).sum(axis=1))
        gap = T.codomain.norm(M.sum(axis=1) - M.max(axis=1))

        if distance > 2.0 * gap * (1.0 + current_config().REL_TOL) + 1e-12:
            logger.error(f"phi_n distance {distance:.6g} exceeds 2‖Σf − ∨f‖ = {2.0 * gap:.6g}")
            raise CertificationError("phi_n construction violated the sum-minus-join certificate")

        result = ApproxResult(
            S=S,
            distance=distance,
            bound=256.0 * eps if eps is not None else 2.0 * gap,
            dominated=S.dominated_by(T),
            method=ApproxMethod.PHI_N,
            eps_used=eps,
            certificates={"sum_minus_join": gap, "smp_bound": 2.0 * gap},
        )
        _check_bound(result, "construct_dp_linfty")
        logger.info(f"phi_n construction: distance {distance:.6g}")
        return result

    @staticmethod
    def construct_dp_supnorm_target(T: LatticeOperator, eps: Optional[float] = None) -> ApproxResult:
        """
        DP approximant of an operator into a sup-norm space by truncating each entry against the
        largest competing entry of its row (columns measured on normalized atoms).

        With a valid DP defect bound eps the distance is at most 257·eps·‖T‖.

        Raises:
            IncompatibleNormError: If the codomain is not a sup-norm space
            CertificationError: If a supplied eps is contradicted
        """
        require_sup(T.codomain, "construct_dp_supnorm_target codomain")
        S = T.with_matrix(truncation_matrix(T.matrix, T.domain.atom_norms()))
        distance = OperatorNormService.operator_norm(T.minus(S)).upper
        bound = None
        if eps is not None:
            bound = 257.0 * eps * OperatorNormService.operator_norm(T).certified_upper
        result = ApproxResult(
            S=S,
            distance=distance,
            bound=bound,
            dominated=S.dominated_by(T),
            method=ApproxMethod.TRUNCATION,
            eps_used=eps,
        )
        _check_bound(result, "construct_dp_supnorm_target")
        logger.info(f"Truncation construction: distance {distance:.6g}")
        return result

    @staticmethod
    def construct_dp_threshold(T: LatticeOperator, eps: float) -> ApproxResult:
        """
        Entrywise eps-cut: 0 for |f| ≤ eps, f for |f| ≥ 2eps, 2(|f| − eps)·sign f between.

        Entries are cut on normalized atoms for any domain, but the 257·eps bound is certified only
        on sup-norm domains; elsewhere an excess is logged and the result marked uncertified.

        Raises:
            InputParseError: If eps is not positive
            IncompatibleNormError: If the codomain is not a sup-norm space
            NotEpsDisjointError: If two columns exceed eps at the same coordinate
        """
        if eps is None or not eps > 0:
            raise InputParseError("construct_dp_threshold needs eps > 0")
        require_sup(T.codomain, "construct_dp_threshold codomain")
        scales = T.domain.atom_norms()
        large = (np.abs(T.matrix) / scales[None, :]) > eps
        crowded = np.flatnonzero(large.sum(axis=1) > 1)
        if crowded.size:
            raise NotEpsDisjointError(
                f"{crowded.size} coordinate(s) carry more than one entry above eps={eps:g} "
                f"(first: coordinate {int(crowded[0])})"
            )

        S = T.with_matrix(threshold_matrix(T.matrix, eps, scales))
        distance = OperatorNormService.operator_norm(T.minus(S)).upper
        result = ApproxResult(
            S=S,
            distance=distance,
            bound=257.0 * eps,
            dominated=S.dominated_by(T),
            method=ApproxMethod.THRESHOLD,
            eps_used=eps,
            certified=T.domain.is_sup,
        )
        _check_bound(result, "construct_dp_threshold")
        logger.info(f"Threshold construction at eps={eps:g}: distance {distance:.6g}")
        return result

    @staticmethod
    def approximate_l1_target(T: LatticeOperator, eps: Optional[float] = None, seed: int = 0) -> ApproxResult:
        """
        Best DP operator below a positive T into an L1-type space, over support assignments.

        The alternating heuristic always runs; brute force joins it while n^m is within
        PIPELINE_BRUTEFORCE_LIMIT, and only then is the bound certified. For an unweighted l1 domain and a
        supplied eps, columns of norm below c = 2√(2·eps·‖T‖/3) may be dropped whole; the variant
        with the smaller distance is kept.

        Raises:
            NonPositiveOperatorError: If T has a negative entry
            IncompatibleNormError: If the codomain is not L1-type
            CertificationError: If a certified bound is violated
        """
        require_positive_operator(T, "approximate_l1_target")
        require_l1_type(T.codomain, "approximate_l1_target codomain")
        config = current_config()
        E = T.domain

        assignment, value = AssignmentService.alternating_assignment(T, seed=seed)
        heuristic_value = value
        brute = T.n ** T.m <= config.PIPELINE_BRUTEFORCE_LIMIT
        certificates = {"heuristic_objective": heuristic_value}
        if brute:
            optimum, optimum_value = AssignmentService.optimal_assignment_bruteforce(T)
            certificates["optimum"] = optimum_value
            if optimum_value <= value:
                assignment, value = optimum, optimum_value
            ratio = heuristic_value / optimum_value if optimum_value > 0 else (1.0 if heuristic_value == 0 else None)
            certificates["oracle_ratio"] = ratio
            if ratio is None or ratio > ORACLE_RATIO_WARN:
                logger.warning(f"Heuristic objective {heuristic_value:.6g} is more than "
                               f"{ORACLE_RATIO_WARN:g}x the optimum {optimum_value:.6g}")
            elif heuristic_value > optimum_value * (1.0 + config.REL_TOL):
                logger.debug(f"Heuristic objective {heuristic_value:.6g} above optimum {optimum_value:.6g}")
        else:
            logger.warning(f"{T.n}^{T.m} assignments exceed the brute-force limit; using the heuristic only")

        norm_T = OperatorNormService.operator_norm(T).upper
        certificates["norm_T"] = norm_T
        S = AssignmentService.build_dp_from_assignment(T, assignment)
        distance = E.dual_norm(T.minus(S).column_norms())

        dor_domain = E.p == 1 and not E.is_weighted
        bound = None
        if eps is not None:
            bound = 256.0 * eps
            if dor_domain:
                c = 2.0 * math.sqrt(2.0 * eps * norm_T / 3.0)
                certificates["dor_threshold"] = c
                dropped = AssignmentService.build_dp_from_assignment(T, assignment, drop_threshold=c)
                dropped_distance = E.dual_norm(T.minus(dropped).column_norms())
                if dropped_distance <= distance:
                    gone = np.flatnonzero(T.column_norms() < c)
                    columns = assignment.columns()
                    columns[np.isin(columns, gone)] = -1
                    assignment = canonical_assignment(T, columns)
                    S, distance = dropped, dropped_distance
                    certificates["dropped_columns"] = gone.tolist()
                if eps < norm_T / 16.0:
                    bound = min(bound, c)

        result = ApproxResult(
            S=S,
            distance=distance,
            bound=bound,
            dominated=S.dominated_by(T),
            method=ApproxMethod.ASSIGNMENT,
            eps_used=eps,
            certified=brute,
            assignment=assignment,
            certificates=certificates,
        )
        _check_bound(result, "approximate_l1_target")
        logger.info(f"Assignment approximation: distance {distance:.6g} (certified={brute})")
        return result

    @staticmethod
    def power_transfer(T: LatticeOperator, q: float) -> LatticeOperator:
        """
        T′ : L1(n) → L1-type, column i = f_i^q entrywise. WeightedLq(q, w) codomains become WeightedL1(w).

        Raises:
            NonPositiveOperatorError: If T has a negative entry
            IncompatibleNormError: If the spaces are not lq(n) → Lq with the given q
        """
        require_positive_operator(T, "power_transfer")
        _require_lq_pair(T, q)
        codomain = (LatticeSpace.weighted(1, T.codomain.weights) if T.codomain.is_weighted
                    else LatticeSpace.lp(T.m, 1))
        return LatticeOperator(LatticeSpace.lp(T.n, 1), codomain, T.matrix ** q)

    @staticmethod
    def root_transfer(S_prime: LatticeOperator, q: float) -> LatticeOperator:
        """Inverse of power_transfer: entrywise q-th roots, back to lq(n) → Lq."""
        require_positive_operator(S_prime, "root_transfer")
        require_l1_type(S_prime.codomain, "root_transfer codomain")
        codomain = (LatticeSpace.weighted(q, S_prime.codomain.weights) if S_prime.codomain.is_weighted
                    else LatticeSpace.lp(S_prime.m, q))
        return LatticeOperator(LatticeSpace.lp(S_prime.n, q), codomain, S_prime.matrix ** (1.0 / q))

    @staticmethod
    def approximate_lq_target(T: LatticeOperator, q: Optional[float] = None, eps: Optional[float] = None,
                              seed: int = 0) -> ApproxResult:
        """
        Transfer to L1 by q-th powers, approximate there, and take q-th roots.

        ‖T − S‖ ≤ 2^8·eps + max_i ‖(T − S)δ_i‖, and max_i ‖(T − S)δ_i‖^q ≤ ‖T′ − S′‖.
        The reported distance is the certified upper bound on ‖T − S‖; the lower one is kept in
        certificates["distance_lower"].

        Raises:
            IncompatibleNormError: If T is not lq(n) → Lq
            CertificationError: If the distance contradicts the bound for the supplied eps
        """
        q = T.codomain.p if q is None else float(q)
        T_prime = ApproxService.power_transfer(T, q)
        inner = ApproxService.approximate_l1_target(
            T_prime, None if eps is None else eps ** q, seed=seed
        )
        root = ApproxService.root_transfer(inner.S, q).matrix
        M = T.matrix
        S = T.with_matrix(np.where(np.isclose(root, M, rtol=1e-12, atol=0.0), M, np.minimum(root, M)))

        R = T.minus(S)
        bounds = OperatorNormService.operator_norm(R, seed=seed)
        column_residual = float(R.column_norms().max()) if R.n else 0.0
        certificates = {
            "column_residual": column_residual,
            "transferred_distance": inner.distance,
            "distance_lower": bounds.lower,
            "distance_upper": bounds.certified_upper,
        }
        bound = None
        if eps is not None:
            bound = 2.0 ** 8 * eps + column_residual
            norm_T = OperatorNormService.operator_norm(T, seed=seed).certified_upper
            certificates["theorem"] = 2.0 ** 8 * eps + 2.0 * math.sqrt(2.0 * eps * norm_T / 3.0)

        result = ApproxResult(
            S=S,
            distance=bounds.certified_upper,
            bound=bound,
            dominated=S.dominated_by(T),
            method=ApproxMethod.POWER_PIPELINE,
            eps_used=eps,
            distance_exact=bounds.exact,
            certified=inner.certified,
            assignment=inner.assignment,
            certificates=certificates,
        )
        result.certificates["bound_verified"] = _check_bound(result, "approximate_lq_target", lower=bounds.lower)
        logger.info(f"Power pipeline q={q:g}: distance {result.distance:.6g} (exact={bounds.exact})")
        return result


def _require_lq_pair(T: LatticeOperator, q: float):
    if not (1.0 < q < math.inf):
        raise IncompatibleNormError(f"Power transfer needs 1 < q < inf, got {q}")
    if T.domain.is_weighted or T.domain.p != q:
        raise IncompatibleNormError(f"Domain must be unweighted l{q:g}, got {T.domain!r}")
    if T.codomain.p != q:
        raise IncompatibleNormError(f"Codomain exponent must be {q:g}, got {T.codomain!r}")
