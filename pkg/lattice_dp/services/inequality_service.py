"""
Exact and sampled checks of the subset-expectation inequalities and their operator consequences.

The core quantity is E_S min(Σ_{i∈S} b_i, Σ_{i∉S} b_i) over all subsets S, which is sandwiched
between 2^-8 (Σb − max b) and Σb − max b.
"""
import math
from typing import List, Optional, Sequence

import numpy as np

from .. import current_config, logger
from ..models import (
    CheckReport,
    LatticeOperator,
    LatticeSpace,
    SphereNet,
    SplitExpectation,
    as_vector,
    conjugate_exponent,
    family_p_sum,
    p_sum,
    parse_exponent,
)
from ..utils.exceptions import (
    DimensionError,
    IncompatibleNormError,
    InputParseError,
    InstanceTooLargeError,
)
from ..utils.helpers import bit_matrix, chunked, gray_code_flips, parallel_map
from ..utils.validators import require_disjoint_family, require_nonnegative, require_positive_operator

SLACK = 1e-12
_BLOCK_CELLS = 1 << 22
_MC_CHUNK = 1 << 16
VECTOR_SPLIT_LIMIT = 20


def _holds(lhs: float, rhs: float) -> bool:
    return lhs <= rhs + SLACK * max(1.0, abs(rhs))


def gray_subset_sums(values: Sequence[float]) -> np.ndarray:
    """All 2^k subset sums in reflected Gray-code order, one addition or subtraction per step."""
    values = [float(v) for v in values]
    sums = np.empty(2 ** len(values))
    sums[0] = 0.0
    member = [False] * len(values)
    current = 0.0
    for step, bit in enumerate(gray_code_flips(len(values)), start=1):
        current = current - values[bit] if member[bit] else current + values[bit]
        member[bit] = not member[bit]
        sums[step] = current
    return sums


def _nonnegative_vector(b) -> np.ndarray:
    b = as_vector(b)
    require_nonnegative(b, "b")
    return b


class InequalityService:
    @staticmethod
    def split_expectation(b, exact_only: bool = False, seed: int = 0) -> SplitExpectation:
        """
        E_S min(Σ_S b, Σ_Sᶜ b) over all 2^len(b) subsets.

        Subset sums of each half of b are generated in Gray-code order and combined blockwise;
        beyond SUBSET_ENUMERATION_CAP entries a Monte-Carlo estimate is returned instead.

        Raises:
            NegativeInputError: If an entry is negative
            InstanceTooLargeError: If b is too long and exact_only is set
        """
        b = _nonnegative_vector(b)
        config = current_config()
        k = b.size
        if k > config.SUBSET_ENUMERATION_CAP:
            if exact_only:
                raise InstanceTooLargeError(
                    f"Exact enumeration is capped at {config.SUBSET_ENUMERATION_CAP} entries, got {k}"
                )
            logger.warning(f"split_expectation: {k} entries exceed the enumeration cap, sampling")
            return InequalityService.expected_min_split_mc(b, seed=seed)

        total = math.fsum(b)
        left = gray_subset_sums(b[:k // 2])
        right = gray_subset_sums(b[k // 2:])
        rows = max(1, _BLOCK_CELLS // right.size)

        def block_sum(span):
            s = left[span.start:span.stop, None] + right[None, :]
            return float(np.minimum(s, total - s).sum())

        partials = parallel_map(block_sum, list(chunked(0, left.size, rows)))
        return SplitExpectation(value=math.fsum(partials) / 2.0 ** k, exact=True)

    @staticmethod
    def expected_min_split(b) -> float:
        return InequalityService.split_expectation(b).value

    @staticmethod
    def expected_min_split_mc(b, samples: Optional[int] = None, seed: int = 0) -> SplitExpectation:
        """Monte-Carlo estimate of the split expectation with its standard error."""
        b = _nonnegative_vector(b)
        samples = samples or current_config().MONTE_CARLO_SAMPLES
        rng = np.random.default_rng(seed)
        total = math.fsum(b)
        sums, squares = [], []
        for span in chunked(0, samples, _MC_CHUNK):
            picks = rng.random((len(span), b.size)) < 0.5
            s = picks @ b
            values = np.minimum(s, total - s)
            sums.append(float(values.sum()))
            squares.append(float((values * values).sum()))
        mean = math.fsum(sums) / samples
        variance = max(0.0, math.fsum(squares) / samples - mean * mean)
        stderr = math.sqrt(variance / max(1, samples - 1))
        return SplitExpectation(value=mean, exact=False, stderr=stderr, samples=samples)

    @staticmethod
    def maxmin_sandwich_check(b, seed: int = 0) -> CheckReport:
        """E_S min(...) ≤ Σb − max b ≤ 2^8 E_S min(...)."""
        b = _nonnegative_vector(b)
        expectation = InequalityService.split_expectation(b, seed=seed)
        lhs = expectation.value
        mid = math.fsum(b) - float(b.max())
        rhs = 2.0 ** 8 * lhs
        if expectation.exact:
            holds = _holds(lhs, mid) and _holds(mid, rhs)
        else:
            margin = 4.0 * (expectation.stderr or 0.0)
            holds = _holds(lhs - margin, mid) and _holds(mid, 2.0 ** 8 * (lhs + margin))
        return CheckReport(
            name="maxmin_sandwich",
            holds=holds,
            values={
                "lhs": lhs,
                "mid": mid,
                "rhs": rhs,
                "ratio": mid / lhs if lhs > 0 else None,
                "slack": min(mid - lhs, rhs - mid),
                "stderr": expectation.stderr,
            },
            exact=expectation.exact,
        )

    @staticmethod
    def vector_split_check(fs, space: LatticeSpace) -> CheckReport:
        """
        Coordinatewise E_S min(Σ_S f, Σ_Sᶜ f) ≥ 2^-8 (Σf − ∨f) and the same inequality after
        taking norms in `space`, by enumerating every subset of the family.

        Raises:
            NegativeInputError: If an entry is negative
            DimensionError: If the family does not live in `space`
            InstanceTooLargeError: If the family has more than 20 members
        """
        F = np.atleast_2d(np.asarray(fs, dtype=float))
        if F.ndim != 2 or F.shape[1] != space.dim:
            raise DimensionError(f"Family must have shape (n, {space.dim}), got {F.shape}")
        require_nonnegative(F, "family")
        n = F.shape[0]
        if n > VECTOR_SPLIT_LIMIT:
            raise InstanceTooLargeError(f"vector_split_check enumerates 2^n subsets; n={n} exceeds {VECTOR_SPLIT_LIMIT}")

        total = F.sum(axis=0)
        rows = max(1, _BLOCK_CELLS // (8 * max(n, space.dim)))

        def block(span):
            B = bit_matrix(np.arange(span.start, span.stop), n)
            s = B @ F
            mins = np.minimum(s, total - s)
            return mins.sum(axis=0), math.fsum(space.norms(mins))

        pieces = parallel_map(block, list(chunked(0, 2 ** n, rows)))
        coord_sums = np.array([p[0] for p in pieces])
        coord_lhs = np.array([math.fsum(col) for col in coord_sums.T]) / 2.0 ** n
        norm_lhs = math.fsum(p[1] for p in pieces) / 2.0 ** n

        gap = total - F.max(axis=0)
        coord_rhs = 2.0 ** -8 * gap
        norm_rhs = 2.0 ** -8 * space.norm(gap)
        coord_holds = bool(np.all(coord_rhs <= coord_lhs + SLACK * np.maximum(1.0, coord_lhs)))
        norm_holds = _holds(norm_rhs, norm_lhs)
        return CheckReport(
            name="vector_split",
            holds=coord_holds and norm_holds,
            values={
                "coord_lhs": coord_lhs,
                "coord_rhs": coord_rhs,
                "norm_lhs": norm_lhs,
                "norm_rhs": norm_rhs,
                "coord_holds": coord_holds,
                "norm_holds": norm_holds,
                "slack": norm_lhs - norm_rhs,
            },
        )

    @staticmethod
    def arb_number_check(T: LatticeOperator, family, p, eps: float) -> CheckReport:
        """
        For a disjoint family and a valid DP defect bound eps of the positive T:
        ‖Σ|Tx_i| − ∨|Tx_i|‖ and ‖(Σ|Tx_i|^p)^(1/p) − T(Σ|x_i|^p)^(1/p)‖ are at most 256·eps·‖Σx_i‖.
        """
        require_positive_operator(T, "arb_number_check")
        p = parse_exponent(p)
        V = np.atleast_2d(np.asarray(family, dtype=float))
        require_disjoint_family(V)
        images = np.abs(T.apply_rows(V))
        sum_lhs = T.codomain.norm(images.sum(axis=0) - images.max(axis=0))
        p_lhs = T.codomain.norm(family_p_sum(images, p) - T.apply(family_p_sum(V, p)))
        rhs = 256.0 * eps * T.domain.norm(V.sum(axis=0))
        return CheckReport(
            name="arb_number",
            holds=_holds(sum_lhs, rhs) and _holds(p_lhs, rhs),
            values={"sum_lhs": sum_lhs, "p_lhs": p_lhs, "rhs": rhs, "p": p if math.isfinite(p) else None,
                    "eps": eps, "slack": rhs - max(sum_lhs, p_lhs)},
        )

    @staticmethod
    def maxmin_operator_check(T: LatticeOperator, xs, eps: float) -> CheckReport:
        """max{‖T(∨x_i) − ∨Tx_i‖, ‖∧Tx_i − T(∧x_i)‖} ≤ 256·eps·‖∨x_i‖ for positive x_i."""
        require_positive_operator(T, "maxmin_operator_check")
        X = np.atleast_2d(np.asarray(xs, dtype=float))
        require_nonnegative(X, "xs")
        images = T.apply_rows(X)
        join_gap = T.codomain.norm(T.apply(X.max(axis=0)) - images.max(axis=0))
        meet_gap = T.codomain.norm(images.min(axis=0) - T.apply(X.min(axis=0)))
        rhs = 256.0 * eps * T.domain.norm(X.max(axis=0))
        lhs = max(join_gap, meet_gap)
        return CheckReport(
            name="maxmin_operator",
            holds=_holds(lhs, rhs),
            values={"join_gap": join_gap, "meet_gap": meet_gap, "rhs": rhs, "eps": eps, "slack": rhs - lhs},
        )

    @staticmethod
    def iterated_join_check(T: LatticeOperator, xs, eps_mp: float) -> CheckReport:
        """‖T(∨x_i) − ∨Tx_i‖ ≤ eps_mp·⌈log₂ n⌉·n for positive x_i in the unit ball."""
        require_positive_operator(T, "iterated_join_check")
        X = np.atleast_2d(np.asarray(xs, dtype=float))
        require_nonnegative(X, "xs")
        if np.any(T.domain.norms(X) > 1.0 + current_config().REL_TOL):
            raise InputParseError("iterated_join_check expects vectors of norm at most 1")
        n = X.shape[0]
        lhs = T.codomain.norm(T.apply(X.max(axis=0)) - T.apply_rows(X).max(axis=0))
        rhs = eps_mp * math.ceil(math.log2(n)) * n
        return CheckReport(
            name="iterated_join",
            holds=_holds(lhs, rhs),
            values={"lhs": lhs, "rhs": rhs, "n": n, "eps_mp": eps_mp, "slack": rhs - lhs},
        )

    @staticmethod
    def sphere_net(q: float, N: int) -> SphereNet:
        """
        N+1 points of {x^q + y^q = 1, x, y ≥ 0} at equal arclength, from (1, 0) to (0, 1).

        The curve is sampled as (cos θ^(2/q), sin θ^(2/q)) on 512·N + 1 angles; net points are
        placed by interpolating θ against the cumulative polyline length. Sampling by angle rather
        than by x keeps the fine polyline resolved where the curve meets the axes, so every point
        lies on the curve and consecutive points are equally spaced along it.
        """
        q = float(q)
        if not (1.0 < q < math.inf):
            raise InputParseError(f"sphere_net needs 1 < q < inf, got {q}")
        if int(N) != N or N < 1:
            raise InputParseError(f"sphere_net needs N >= 1, got {N}")
        N = int(N)
        theta = np.linspace(0.0, math.pi / 2.0, 512 * N + 1)
        fine = _curve(theta, q)
        length = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(fine, axis=0).T))])
        targets = np.linspace(0.0, length[-1], N + 1)
        angles = np.interp(targets, length, theta)
        angles[0], angles[-1] = 0.0, math.pi / 2.0
        points = _curve(angles, q)
        points[0], points[-1] = (1.0, 0.0), (0.0, 1.0)
        return SphereNet(q=q, N=N, points=tuple((float(x), float(y)) for x, y in points))

    @staticmethod
    def sphere_net_coverage(net: SphereNet) -> CheckReport:
        """Curve residual of every point and the largest probe distance on a 10·N + 1 grid."""
        P = net.as_array()
        residual = float(np.abs(P[:, 0] ** net.q + P[:, 1] ** net.q - 1.0).max())
        probes = _curve(np.linspace(0.0, math.pi / 2.0, 10 * net.N + 1), net.q)
        gaps = np.abs(probes[:, None, :] - P[None, :, :]).max(axis=2).min(axis=1)
        max_gap = float(gaps.max())
        theta = np.linspace(0.0, math.pi / 2.0, 512 * net.N + 1)
        length = float(np.hypot(*np.diff(_curve(theta, net.q), axis=0).T).sum())
        bound = length / net.N
        monotone = bool(np.all(np.diff(P[:, 0]) < 0) and np.all(np.diff(P[:, 1]) > 0))
        return CheckReport(
            name="sphere_net",
            holds=residual <= 1e-12 and max_gap <= bound + SLACK and length <= 2.0 and monotone,
            values={"curve_residual": residual, "max_gap": max_gap, "bound": bound, "arclength": length,
                    "monotone": monotone},
        )

    @staticmethod
    def net_estimate_check(u, v, p, net: SphereNet, space: Optional[LatticeSpace] = None) -> CheckReport:
        """
        ‖(|u|^p + |v|^p)^(1/p) − ∨_j (x_j|u| + y_j|v|)‖ ≤ (2/N)(‖u‖ + ‖v‖), and the net maximum
        never exceeds the p-sum coordinatewise. Norms are taken in `space` (default lp).

        Raises:
            IncompatibleNormError: If the net is not built for the conjugate exponent of p
        """
        p = parse_exponent(p)
        if not (1.0 < p < math.inf):
            raise InputParseError(f"net_estimate_check needs 1 < p < inf, got {p}")
        q = conjugate_exponent(p)
        if abs(q - net.q) > 1e-9 * q:
            raise IncompatibleNormError(f"Net exponent {net.q:g} is not conjugate to p={p:g}")
        u = as_vector(u)
        v = as_vector(v, u.size)
        space = space or LatticeSpace.lp(u.size, p)
        P = net.as_array()
        au, av = np.abs(u), np.abs(v)
        net_max = (P[:, :1] * au[None, :] + P[:, 1:] * av[None, :]).max(axis=0)
        exact = p_sum(u, v, p)
        lhs = space.norm(exact - net_max)
        rhs = 2.0 / net.N * (space.norm(u) + space.norm(v))
        dominated = bool(np.all(net_max <= exact * (1.0 + SLACK) + SLACK))
        return CheckReport(
            name="net_estimate",
            holds=_holds(lhs, rhs) and dominated,
            values={"lhs": lhs, "rhs": rhs, "N": net.N, "p": p, "dominated": dominated, "slack": rhs - lhs},
        )

    @staticmethod
    def refinement_norm_demo(q: float, eps: float, normT: float, Cq: float, levels: Sequence[int],
                             p: float = 1.0, operator: Optional[LatticeOperator] = None) -> List[CheckReport]:
        """
        The bound 256·eps + Cq·normT·n^(1/q − 1/p) for each n in levels.

        With an operator on a dyadic domain (WeightedLp with 2^K equal weights), also measures, for
        the unit function split into n equal-measure pieces x_i: ‖Tx‖, ‖(Σ|Tx_i|^q)^(1/q)‖ and the
        gap ‖Tx − (Σ|Tx_i|^q)^(1/q)‖.

        Raises:
            InputParseError: If q ≤ p, or a level does not divide the dyadic domain
        """
        p = parse_exponent(p)
        q = parse_exponent(q)
        if q <= p:
            raise InputParseError(f"refinement_norm_demo needs q > p, got q={q:g}, p={p:g}")
        if operator is not None:
            _require_dyadic(operator.domain, p)

        reports = []
        for n in levels:
            n = int(n)
            if n < 1:
                raise InputParseError(f"Levels must be positive integers, got {n}")
            bound = 256.0 * eps + Cq * normT * n ** (1.0 / q - 1.0 / p)
            values = {"n": n, "bound": bound}
            if operator is not None:
                dim = operator.n
                if dim % n:
                    raise InputParseError(f"Level {n} does not divide the dyadic dimension {dim}")
                pieces = np.kron(np.eye(n), np.ones(dim // n))
                images = np.abs(operator.apply_rows(pieces))
                q_sum = family_p_sum(images, q)
                Tx = operator.apply(np.ones(dim))
                values.update({
                    "norm_Tx": operator.codomain.norm(Tx),
                    "q_sum_norm": operator.codomain.norm(q_sum),
                    "p_estimate_gap": operator.codomain.norm(Tx - q_sum),
                })
            reports.append(CheckReport(name="refinement_norm", holds=None, values=values, instance=f"n={n}"))
        return reports

    @staticmethod
    def sup_additivity_check(sequences) -> CheckReport:
        """
        ∨_n Σ_i x_n^(i) = Σ_i ∨_n x_n^(i) for coordinatewise increasing positive sequences,
        given as an array of shape (k, length, dim).

        Raises:
            InputParseError: If a sequence is not increasing
        """
        X = np.asarray(sequences, dtype=float)
        if X.ndim != 3:
            raise DimensionError(f"Expected shape (k, length, dim), got {X.shape}")
        require_nonnegative(X, "sequences")
        if np.any(np.diff(X, axis=1) < 0):
            raise InputParseError("Every sequence must be coordinatewise increasing")
        lhs = X.sum(axis=0).max(axis=0)
        rhs = X.max(axis=1).sum(axis=0)
        diff = float(np.abs(lhs - rhs).max())
        return CheckReport(
            name="sup_additivity",
            holds=diff <= SLACK * max(1.0, float(np.abs(rhs).max())),
            values={"lhs": lhs, "rhs": rhs, "max_difference": diff},
        )


def _curve(theta: np.ndarray, q: float) -> np.ndarray:
    c = np.clip(np.cos(theta), 0.0, 1.0)
    s = np.clip(np.sin(theta), 0.0, 1.0)
    return np.stack([c ** (2.0 / q), s ** (2.0 / q)], axis=-1)


def dyadic_space(K: int, p: float) -> LatticeSpace:
    """2^K cells of measure 2^-K: simple functions on the unit interval with the Lp norm."""
    return LatticeSpace.weighted(p, [2.0 ** -K] * (2 ** K))


def _require_dyadic(space: LatticeSpace, p: float):
    w = space.weights
    if not space.is_weighted or space.p != p or not np.allclose(w, w[0]) or abs(w.sum() - 1.0) > 1e-12:
        raise IncompatibleNormError(f"refinement_norm_demo needs an equal-measure WeightedL{p:g} domain")
