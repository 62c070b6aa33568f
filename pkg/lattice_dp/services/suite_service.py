"""
Seeded verification suites behind `lattice-dp verify`. Every suite returns a list of
CheckReport rows; a row with holds=False is a failing instance.
"""
import math
from typing import Callable, Dict, List, Optional

import numpy as np

from .. import logger
from ..models import CheckReport, LatticeOperator, LatticeSpace, conjugate_exponent
from ..utils.exceptions import InputParseError
from ..utils.helpers import spawn_rngs
from .defect_service import DefectService
from .inequality_service import InequalityService
from .instance_service import InstanceService

GRAPH_INSTANCES = [(2, 1, 2), (3, 1, 2), (4, 1, 2), (16, 1, 2), (4, 2, 3)]
NET_SIZES = [4, 16, 64]
NET_EXPONENTS = [2.0, 1.5]
WALSH_LEVELS = (3, 6)
SEARCH_AGREEMENT_TOL = 1e-5

DEFAULT_TRIALS = {
    "maxmin": 10000,
    "vector": 100,
    "net": 100,
    "graph": None,
    "walsh": 64,
    "arbnumber": 50,
    "joins": 50,
}


def _random_family(rng: np.random.Generator, n: int) -> np.ndarray:
    """Positive disjoint family: the atoms split into random blocks with random weights."""
    labels = rng.integers(0, rng.integers(1, n + 1), size=n)
    weights = rng.uniform(0.1, 1.0, size=n)
    family = [np.where(labels == k, weights, 0.0) for k in np.unique(labels)]
    return np.asarray(family)


def _unit_ball(space: LatticeSpace, X: np.ndarray) -> np.ndarray:
    return X / np.maximum(space.norms(X), 1.0)[:, None]


def _perturbed(rng: np.random.Generator, seed: int):
    n = int(rng.integers(2, 7))
    m = int(rng.integers(2, 9))
    eta = float(10.0 ** -rng.uniform(2.0, 4.0))
    return InstanceService.perturbed_dp_instance(n, m, eta, seed=seed)


class SuiteService:
    @staticmethod
    def names() -> List[str]:
        return list(DEFAULT_TRIALS)

    @staticmethod
    def run(suite: str, seed: int = 0, trials: Optional[int] = None) -> List[CheckReport]:
        """
        Raises:
            InputParseError: If the suite is unknown or trials is not positive
        """
        runners: Dict[str, Callable] = {
            "maxmin": SuiteService.maxmin,
            "vector": SuiteService.vector,
            "net": SuiteService.net,
            "graph": SuiteService.graph,
            "walsh": SuiteService.walsh,
            "arbnumber": SuiteService.arbnumber,
            "joins": SuiteService.joins,
        }
        if suite not in runners:
            raise InputParseError(f"Unknown suite {suite!r}; choose from {', '.join(runners)}")
        if trials is None:
            trials = DEFAULT_TRIALS[suite]
        elif trials < 1:
            raise InputParseError(f"trials must be positive, got {trials}")
        reports = runners[suite](seed, trials)
        failures = sum(1 for r in reports if r.holds is False)
        logger.info(f"Suite {suite}: {len(reports)} checks, {failures} failures")
        return reports

    @staticmethod
    def maxmin(seed: int, trials: int) -> List[CheckReport]:
        cases = [("all_equal", np.ones(12)), ("one_hot", np.eye(12)[0]), ("geometric", 0.5 ** np.arange(12))]
        reports = []
        for name, b in cases:
            report = InequalityService.maxmin_sandwich_check(b)
            report.instance = name
            reports.append(report)
        for trial, rng in enumerate(spawn_rngs(seed, trials)):
            b = rng.random(int(rng.integers(1, 13)))
            report = InequalityService.maxmin_sandwich_check(b)
            report.instance = f"trial={trial} len={b.size}"
            reports.append(report)
        return reports

    @staticmethod
    def vector(seed: int, trials: int) -> List[CheckReport]:
        reports = []
        for trial, rng in enumerate(spawn_rngs(seed, trials)):
            dim = int(rng.integers(1, 9))
            n = int(rng.integers(1, 11))
            q = float([1, 2, 3][trial % 3])
            report = InequalityService.vector_split_check(rng.random((n, dim)), LatticeSpace.lp(dim, q))
            report.instance = f"trial={trial} n={n} dim={dim} q={q:g}"
            reports.append(report)
        return reports

    @staticmethod
    def net(seed: int, trials: int) -> List[CheckReport]:
        """Net estimate on random pairs for every (N, p), the net geometry, and the error decay in N."""
        reports = []
        for p in NET_EXPONENTS:
            q = conjugate_exponent(p)
            errors = []
            for N in NET_SIZES:
                net = InequalityService.sphere_net(q, N)
                coverage = InequalityService.sphere_net_coverage(net)
                coverage.instance = f"q={q:g} N={N}"
                reports.append(coverage)
                total = 0.0
                for trial, rng in enumerate(spawn_rngs(seed, trials)):
                    dim = int(rng.integers(1, 9))
                    report = InequalityService.net_estimate_check(rng.random(dim), rng.random(dim), p, net)
                    report.instance = f"trial={trial} p={p:g} N={N}"
                    total += report.values["lhs"]
                    reports.append(report)
                errors.append(total)
            ratios = [errors[k] / errors[k + 1] if errors[k + 1] > 0 else math.inf for k in range(len(errors) - 1)]
            reports.append(CheckReport(
                "net_error_decay", all(r >= 3.0 for r in ratios),
                {"total_errors": errors, "ratios": ratios, "sizes": NET_SIZES}, f"p={p:g}", exact=False,
            ))
        return reports

    @staticmethod
    def graph(seed: int, trials: Optional[int]) -> List[CheckReport]:
        reports = []
        for N, p, q in GRAPH_INSTANCES:
            inst = InstanceService.graph_operator(N, p, q)
            reports.extend(InstanceService.graph_verify(inst, seed=seed, restarts=trials))
        return reports

    @staticmethod
    def walsh(seed: int, trials: int) -> List[CheckReport]:
        inst = InstanceService.walsh_operator(*WALSH_LEVELS)
        return InstanceService.walsh_verify(inst, seed=seed, pairs=trials)

    @staticmethod
    def arbnumber(seed: int, trials: int) -> List[CheckReport]:
        """Family estimates and max/min estimates on perturbed DP operators with their analytic eps."""
        reports = []
        for trial, rng in enumerate(spawn_rngs(seed, trials)):
            inst = _perturbed(rng, seed + trial)
            T, eps = inst.operator, inst.eps_analytic
            label = f"trial={trial} {T.m}x{T.n} eta={inst.params['eta']:.3g}"

            measured = DefectService.dp_defect_search(T, seed=seed).lower_bound
            reports.append(CheckReport(
                "perturbed_defect", measured <= eps + 1e-6,
                {"search_lower": measured, "eps_analytic": eps, "slack": eps - measured}, label, exact=False,
            ))

            p = [1.5, 2.0, 3.0][trial % 3]
            family = _random_family(rng, T.n)
            report = InequalityService.arb_number_check(T, family, p, eps)
            report.instance = label
            reports.append(report)

            xs = rng.random((int(rng.integers(2, 5)), T.n))
            report = InequalityService.maxmin_operator_check(T, xs, eps)
            report.instance = label
            reports.append(report)
        return reports

    @staticmethod
    def joins(seed: int, trials: int) -> List[CheckReport]:
        """Iterated joins, increasing suprema, and the agreement of the MP and LH searches with the DP search."""
        reports = []
        for trial, rng in enumerate(spawn_rngs(seed, trials)):
            inst = _perturbed(rng, seed + trial)
            T = inst.operator
            label = f"trial={trial} {T.m}x{T.n}"
            xs = _unit_ball(T.domain, rng.random((int(rng.integers(2, 7)), T.n)))
            report = InequalityService.iterated_join_check(T, xs, 2.0 * inst.params["eta"])
            report.instance = label
            reports.append(report)

            steps = rng.random((int(rng.integers(1, 4)), int(rng.integers(1, 6)), int(rng.integers(1, 5))))
            report = InequalityService.sup_additivity_check(np.cumsum(steps, axis=1))
            report.instance = f"trial={trial}"
            reports.append(report)

            n = int(rng.integers(3, 6))
            space = LatticeSpace.lp(n, 2)
            reports.append(_connections_report(LatticeOperator(space, space, rng.random((n, n))), seed, f"trial={trial} n={n}"))
        return reports


def _connections_report(T: LatticeOperator, seed: int, label: str) -> CheckReport:
    """
    For positive T the MP search agrees with the DP search and the LH search stays below twice it.
    The same relations are also checked on the DP witness, where they hold to rounding.
    """
    dp = DefectService.dp_defect_search(T, seed=seed)
    mp_search = DefectService.mp_defect_search(T, seed=seed).lower_bound
    lh_search = DefectService.lh_defect_search(T, seed=seed).lower_bound
    x, y = np.asarray(dp.witness.x), np.asarray(dp.witness.y)
    mp_on_witness = DefectService.mp_defect(T, x, y)
    lh_on_witness = DefectService.lh_defect(T, x - y)
    tol = 1e-12 * max(1.0, dp.lower_bound)
    holds = (
        abs(mp_search - dp.lower_bound) <= SEARCH_AGREEMENT_TOL
        and lh_search <= 2.0 * dp.lower_bound + SEARCH_AGREEMENT_TOL
        and abs(mp_on_witness - dp.lower_bound) <= tol
        and lh_on_witness <= 2.0 * dp.lower_bound + tol
    )
    return CheckReport(
        "defect_connections", holds,
        {
            "dp_search": dp.lower_bound,
            "mp_on_witness": mp_on_witness,
            "lh_on_witness": lh_on_witness,
            "mp_search": mp_search,
            "lh_search": lh_search,
        },
        label, exact=False,
    )
