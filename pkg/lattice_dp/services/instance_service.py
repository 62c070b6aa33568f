"""
Generators and verifiers for the explicit operators: the complete-graph counterexample, the
Walsh block example, perturbed DP operators with a known defect bound, and direct sums.
"""
import math
from typing import List, NamedTuple, Optional, Sequence

import networkx as nx
import numpy as np

from .. import current_config, logger
from ..models import (
    CheckReport,
    GraphInstance,
    LatticeOperator,
    LatticeSpace,
    NormKind,
    PerturbedInstance,
    SupportAssignment,
    WalshInstance,
    parse_exponent,
)
from ..utils.exceptions import IncompatibleNormError, InputParseError
from ..utils.helpers import spawn_rngs
from .approx_service import phi_n_matrix, truncation_matrix
from .assignment_service import AssignmentService
from .defect_service import DefectService
from .operator_norm_service import OperatorNormService

WALSH_MAX_LEVEL = 10
WALSH_GAP = 1.0 / (3.0 * math.sqrt(2.0))


class ColumnLowerBound(NamedTuple):
    value: float
    assignment: SupportAssignment
    exhaustive: bool


def sylvester(order: int) -> np.ndarray:
    """Sylvester-Hadamard matrix of a power-of-two order, entries ±1."""
    if order < 1 or order & (order - 1):
        raise InputParseError(f"Sylvester order must be a power of two, got {order}")
    H = np.ones((1, 1))
    while H.shape[0] < order:
        H = np.block([[H, H], [H, -H]])
    return H


def graph_eps(N: int, p: float, q: float) -> float:
    """Proven DP defect bound of the graph operator."""
    if q >= 2.0 * p:
        return N ** (-1.0 / q)
    return (N ** -1.0 * (N + 1) ** (2.0 - q / p)) ** (1.0 / q)


def _block_diagonal(mats: Sequence[np.ndarray]) -> np.ndarray:
    rows = sum(A.shape[0] for A in mats)
    cols = sum(A.shape[1] for A in mats)
    out = np.zeros((rows, cols))
    r = c = 0
    for A in mats:
        out[r:r + A.shape[0], c:c + A.shape[1]] = A
        r += A.shape[0]
        c += A.shape[1]
    return out


class InstanceService:
    @staticmethod
    def graph_operator(N: int, p, q) -> GraphInstance:
        """
        T : lp^(N+1) → lq^M with column i = N^(-1/q)·1_{F_i}, F_i the edges of K_{N+1} at vertex i.
        Edges are numbered in lexicographic vertex order.

        Raises:
            InputParseError: Unless N ≥ 2 and 1 ≤ p < q < inf
        """
        p, q = parse_exponent(p), parse_exponent(q)
        if int(N) != N or N < 2:
            raise InputParseError(f"N must be an integer >= 2, got {N}")
        if not (p < q < math.inf):
            raise InputParseError(f"Need 1 <= p < q < inf, got p={p}, q={q}")
        N = int(N)
        graph = nx.complete_graph(N + 1)
        edges = sorted(tuple(sorted(e)) for e in graph.edges())
        incidence = [frozenset(s for s, e in enumerate(edges) if i in e) for i in range(N + 1)]
        matrix = np.zeros((len(edges), N + 1))
        for i, F in enumerate(incidence):
            matrix[sorted(F), i] = N ** (-1.0 / q)
        T = LatticeOperator(LatticeSpace.lp(N + 1, p), LatticeSpace.lp(len(edges), q), matrix)
        return GraphInstance(N=N, p=p, q=q, edges=edges, incidence=incidence, operator=T)

    @staticmethod
    def dp_distance_column_lower_bound(T: LatticeOperator, exhaustive_limit: Optional[int] = None) -> ColumnLowerBound:
        """
        min over support assignments of max_i ‖f_i restricted to A_iᶜ‖ / ‖δ_i‖, a lower bound on
        ‖T − S‖ for every DP operator S. Only an estimate when the enumeration is not exhaustive.
        """
        value, assignment, exhaustive = AssignmentService.column_residual_minimum(T, exhaustive_limit)
        logger.info(f"Column lower bound {value:.6g} (exhaustive={exhaustive})")
        return ColumnLowerBound(value, assignment, exhaustive)

    @staticmethod
    def graph_verify(inst: GraphInstance, seed: int = 0, restarts: Optional[int] = None) -> List[CheckReport]:
        """
        Norm bound 2^(1−1/q), DP defect at most eps(N), and distance to DP operators at least 2^(−1/q).
        """
        T, N, p, q = inst.operator, inst.N, inst.p, inst.q
        label = f"graph N={N} p={p:g} q={q:g}"
        reports = []

        norm_bound = 2.0 ** (1.0 - 1.0 / q)
        upper = OperatorNormService.interpolation_bound(T)
        reports.append(CheckReport(
            "graph_norm", upper <= norm_bound + 1e-9,
            {"interpolation_upper": upper, "bound": norm_bound, "slack": norm_bound - upper}, label,
        ))

        eps = graph_eps(N, p, q)
        search = DefectService.dp_defect_search(T, seed=seed, restarts=restarts)
        x, y = np.asarray(search.witness.x), np.asarray(search.witness.y)
        meet = T.codomain.norm(np.minimum(np.abs(T.apply(x)), np.abs(T.apply(y))))
        geometric = meet / math.sqrt(T.domain.norm(x) * T.domain.norm(y))
        reports.append(CheckReport(
            "graph_dp_defect",
            search.lower_bound <= eps + 1e-6 and geometric <= eps + 1e-6,
            {"search_lower": search.lower_bound, "geometric_defect": geometric, "eps": eps,
             "slack": eps - max(search.lower_bound, geometric)},
            label, exact=False,
        ))

        bound = InstanceService.dp_distance_column_lower_bound(T)
        target = 2.0 ** (-1.0 / q)
        holds = bound.value >= target - 1e-9 if bound.exhaustive else None
        reports.append(CheckReport(
            "graph_dp_distance", holds,
            {"column_lower_bound": bound.value, "target": target,
             "equals_target": abs(bound.value - target) <= 1e-9, "slack": bound.value - target},
            label, exact=bound.exhaustive,
        ))
        return reports

    @staticmethod
    def walsh_operator(k_min: int, k_max: int) -> WalshInstance:
        """
        Block-diagonal sum of I + 2^(-i/2)·S_i on l2 for levels k_min..k_max, S_i = H_(2^i) / 2^(i/2).

        Raises:
            InputParseError: Unless 1 ≤ k_min ≤ k_max ≤ 10
        """
        if not (1 <= int(k_min) <= int(k_max) <= WALSH_MAX_LEVEL):
            raise InputParseError(f"Need 1 <= k_min <= k_max <= {WALSH_MAX_LEVEL}, got {k_min}, {k_max}")
        blocks = []
        for level in range(int(k_min), int(k_max) + 1):
            S = sylvester(2 ** level) * 2.0 ** (-level / 2.0)
            blocks.append((level, S))
        inst = WalshInstance(k_min=int(k_min), k_max=int(k_max), blocks=blocks, operator=None)
        matrix = _block_diagonal([inst.block_operator(level) for level, _ in blocks])
        space = LatticeSpace.lp(matrix.shape[0], 2)
        inst.operator = LatticeOperator(space, space, matrix)
        return inst

    @staticmethod
    def walsh_verify(inst: WalshInstance, eps_target: Optional[float] = None, seed: int = 0,
                     pairs: int = 64, enumeration_limit: Optional[int] = None) -> List[CheckReport]:
        """
        ‖T − I‖ = 2^(-k_min/2) ≤ eps_target, witness meets near 2^(-1/2), sampled block DP values at
        most 3·2^(-i/2), and distance of |T| to DP operators at least 1/(3√2).
        """
        if eps_target is None:
            eps_target = 6.0 * 2.0 ** (-inst.k_min / 2.0)
        limit = max(enumeration_limit or current_config().ASSIGNMENT_ENUMERATION_LIMIT, 8 ** 8)
        label = f"walsh k={inst.k_min}..{inst.k_max}"
        reports = []

        perturbation = 0.0
        for level, S in inst.blocks:
            block = LatticeOperator(LatticeSpace.lp(S.shape[0], 2), LatticeSpace.lp(S.shape[0], 2),
                                    2.0 ** (-level / 2.0) * S)
            perturbation = max(perturbation, OperatorNormService.operator_norm(block).upper)
        expected = 2.0 ** (-inst.k_min / 2.0)
        reports.append(CheckReport(
            "walsh_perturbation",
            abs(perturbation - expected) <= 1e-9 and perturbation <= eps_target,
            {"norm_T_minus_I": perturbation, "expected": expected, "eps_target": eps_target},
            label,
        ))

        rngs = spawn_rngs(seed, len(inst.blocks))
        for (level, S), rng in zip(inst.blocks, rngs):
            dim = S.shape[0]
            space = LatticeSpace.lp(dim, 2)
            T_i = LatticeOperator(space, space, inst.block_operator(level))
            modulus = T_i.modulus()
            block_label = f"{label} level={level}"

            half = dim // 2
            x = np.zeros(dim)
            x[:half] = 2.0 ** (-(level - 1) / 2.0)
            y = np.zeros(dim)
            y[half:] = 2.0 ** (-(level - 1) / 2.0)
            meet = space.norm(np.minimum(modulus.apply(x), modulus.apply(y)))
            tolerance = 2.0 ** (1 - level)
            reports.append(CheckReport(
                "walsh_witness_meet", abs(meet - 2.0 ** -0.5) <= tolerance,
                {"meet": meet, "target": 2.0 ** -0.5, "tolerance": tolerance}, block_label,
            ))

            sampled = _sampled_dp_values(T_i, rng, pairs)
            dp_bound = 3.0 * 2.0 ** (-level / 2.0)
            values = {"sampled_max": sampled, "bound": dp_bound}
            if dim <= 8:
                values["search_lower"] = DefectService.dp_defect_search(T_i, seed=seed).lower_bound
            worst = max(v for k, v in values.items() if k != "bound")
            reports.append(CheckReport(
                "walsh_block_dp", worst <= dp_bound + 1e-9, {**values, "slack": dp_bound - worst},
                block_label, exact=False,
            ))

            A = modulus.matrix
            candidates = {
                "phi_n": np.linalg.norm(A - phi_n_matrix(A), 2),
                "truncation": np.linalg.norm(A - truncation_matrix(A), 2),
            }
            distance_values = {f"{name}_distance": float(v) for name, v in candidates.items()}
            holds = all(v >= WALSH_GAP - 1e-6 for v in candidates.values())
            exact = True
            if dim ** dim <= limit:
                bound = InstanceService.dp_distance_column_lower_bound(modulus, limit)
                distance_values["column_lower_bound"] = bound.value
                holds = holds and bound.value >= WALSH_GAP - 1e-6
            else:
                exact = False
            reports.append(CheckReport(
                "walsh_modulus_distance", holds, {**distance_values, "gap": WALSH_GAP}, block_label, exact=exact,
            ))
        return reports

    @staticmethod
    def perturbed_dp_instance(n: int, m: int, eta: float, seed: int = 0,
                              domain: Optional[LatticeSpace] = None,
                              codomain: Optional[LatticeSpace] = None) -> PerturbedInstance:
        """
        T = S₀ + η·R with S₀ a random positive DP contraction and R a positive operator scaled to a
        norm upper bound of 1, so that T has DP defect at most 2η.

        Raises:
            InputParseError: If eta is negative or a dimension is not positive
        """
        if eta < 0:
            raise InputParseError(f"eta must be nonnegative, got {eta}")
        if n < 1 or m < 1:
            raise InputParseError(f"Dimensions must be positive, got n={n}, m={m}")
        domain = domain or LatticeSpace.lp(n, 1)
        codomain = codomain or LatticeSpace.lp(m, 1)
        rng = np.random.default_rng(seed)

        owners = rng.integers(0, n, size=m)
        base = np.zeros((m, n))
        base[np.arange(m), owners] = rng.uniform(0.5, 1.0, size=m)
        S0 = LatticeOperator(domain, codomain, base)
        S0 = S0.scaled(1.0 / OperatorNormService.operator_norm(S0, seed=seed).certified_upper)

        R = LatticeOperator(domain, codomain, rng.random((m, n)))
        R = R.scaled(1.0 / OperatorNormService.operator_norm(R, seed=seed).certified_upper)

        T = S0.with_matrix(S0.matrix + eta * R.matrix)
        params = {"n": n, "m": m, "eta": eta, "seed": seed, "norm_R_upper": 1.0}
        logger.info(f"Perturbed DP instance {m}x{n}, eta={eta:g}: analytic eps {2.0 * eta:.6g}")
        return PerturbedInstance(operator=T, eps_analytic=2.0 * eta, base=S0, params=params)

    @staticmethod
    def direct_sum(blocks: Sequence[LatticeOperator], outer_p=None) -> LatticeOperator:
        """
        Block-diagonal sum whose domain and codomain are the outer_p-sums of the block spaces.

        Raises:
            IncompatibleNormError: If block exponents differ from outer_p or mix sup with lp
        """
        if not blocks:
            raise InputParseError("direct_sum needs at least one block")
        outer_p = blocks[0].domain.p if outer_p is None else parse_exponent(outer_p)
        domain = _sum_space([B.domain for B in blocks], outer_p)
        codomain = _sum_space([B.codomain for B in blocks], outer_p)
        return LatticeOperator(domain, codomain, _block_diagonal([B.matrix for B in blocks]))


def _sum_space(spaces: Sequence[LatticeSpace], outer_p: float) -> LatticeSpace:
    if any(s.p != outer_p for s in spaces):
        raise IncompatibleNormError(
            f"direct_sum needs every block space to carry exponent {outer_p}, got {[repr(s) for s in spaces]}"
        )
    dim = sum(s.dim for s in spaces)
    if math.isinf(outer_p):
        if any(s.norm_spec.kind is not NormKind.SUP for s in spaces):
            raise IncompatibleNormError("direct_sum with outer sup needs sup-norm blocks")
        return LatticeSpace.sup(dim)
    if any(s.is_weighted for s in spaces):
        return LatticeSpace.weighted(outer_p, np.concatenate([s.weights for s in spaces]))
    return LatticeSpace.lp(dim, outer_p)


def _sampled_dp_values(T: LatticeOperator, rng: np.random.Generator, pairs: int) -> float:
    """Largest DP quotient over seeded random disjoint pairs (random split, Gaussian coefficients)."""
    dim = T.n
    best = 0.0
    for _ in range(pairs):
        split = rng.random(dim) < 0.5
        if split.all() or not split.any():
            split[rng.integers(0, dim)] ^= True
        coefficients = rng.standard_normal(dim)
        x = np.where(split, coefficients, 0.0)
        y = np.where(split, 0.0, coefficients)
        if T.domain.norm(x) == 0 or T.domain.norm(y) == 0:
            continue
        best = max(best, DefectService.pairwise_dp_value(T, x, y))
    return best
