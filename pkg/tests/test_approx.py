import math

import numpy as np
import pytest

from lattice_dp.models import ApproxMethod, LatticeOperator, LatticeSpace
from lattice_dp.services import ApproxService, DefectService, InstanceService, OperatorNormService
from lattice_dp.services.approx_service import phi_n, phi_n_matrix, threshold_matrix, truncation_matrix
from lattice_dp.utils.exceptions import (
    IncompatibleNormError,
    InputParseError,
    NonPositiveOperatorError,
    NotEpsDisjointError,
)


@pytest.mark.parametrize('t,expected', (
    ([5.0], 5.0),
    ([3.0, 1.0], 3.0),
    ([1.5, 1.0, 0.2], 1.0),
    ([1.0, 1.0], 0.0),
    ([0.5, -1.0], 0.0),
))
def test_phi_n(t, expected):
    assert phi_n(t) == pytest.approx(expected)


def test_phi_n_matrix_rows_match_scalar_rule():
    rng = np.random.default_rng(0)
    F = rng.random((6, 4))
    G = phi_n_matrix(F)
    for t in range(6):
        for i in range(4):
            others = np.delete(F[t], i)
            assert G[t, i] == pytest.approx(phi_n(np.concatenate([[F[t, i]], others])))
    assert np.all((G != 0).sum(axis=1) <= 1)


def test_truncation_and_threshold_are_idempotent():
    rng = np.random.default_rng(1)
    F = rng.random((5, 3))
    S = truncation_matrix(F)
    assert np.array_equal(truncation_matrix(S), S)
    D = np.diag([1.0, 2.0, 3.0])
    assert np.array_equal(threshold_matrix(D, 0.1), D)


def _sup_domain(seed, n=5, m=8, eta=1e-3, codomain=None):
    return InstanceService.perturbed_dp_instance(
        n, m, eta, seed=seed, domain=LatticeSpace.sup(n), codomain=codomain or LatticeSpace.lp(m, 1)
    )


def test_phi_construction_fixes_dp_operators():
    T = LatticeOperator(LatticeSpace.sup(2), LatticeSpace.lp(3, 2), [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0]])
    result = ApproxService.construct_dp_linfty(T)
    assert result.distance == 0.0
    assert np.array_equal(result.S.matrix, T.matrix)


@pytest.mark.parametrize('seed', range(200))
def test_phi_construction_on_perturbed_instances(seed):
    inst = _sup_domain(seed, n=2 + seed % 8, m=3 + seed % 10)
    T = inst.operator
    result = ApproxService.construct_dp_linfty(T, inst.eps_analytic)
    assert result.method is ApproxMethod.PHI_N
    assert result.S.is_dp() and result.dominated
    assert result.distance <= 2 * result.certificates["sum_minus_join"] * (1 + 1e-9) + 1e-12
    assert result.distance <= 256 * inst.eps_analytic


def test_phi_construction_preconditions():
    signed = LatticeOperator(LatticeSpace.sup(2), LatticeSpace.sup(1), [[1.0, -1.0]])
    with pytest.raises(NonPositiveOperatorError):
        ApproxService.construct_dp_linfty(signed)
    with pytest.raises(IncompatibleNormError):
        ApproxService.construct_dp_linfty(LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.sup(1), [[1.0, 1.0]]))


@pytest.mark.parametrize('seed', range(10))
def test_truncation_on_sup_targets(seed):
    inst = InstanceService.perturbed_dp_instance(
        4, 6, 5e-4, seed=seed, domain=LatticeSpace.lp(4, 2), codomain=LatticeSpace.sup(6)
    )
    T, eps = inst.operator, inst.eps_analytic
    result = ApproxService.construct_dp_supnorm_target(T, eps)
    assert result.S.is_dp()
    norm_T = OperatorNormService.operator_norm(T).certified_upper
    assert result.bound == pytest.approx(257 * eps * norm_T)
    assert result.distance <= 257 * eps * norm_T


def test_truncation_bound_scales_with_the_operator_norm():
    T = LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.sup(2), [[0.5, 0.01], [0.0, 0.25]])
    result = ApproxService.construct_dp_supnorm_target(T, 0.02)
    assert result.bound == pytest.approx(257 * 0.02 * 0.5)
    assert result.distance == pytest.approx(0.01)


def test_truncation_fixes_dp_operators():
    T = LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.sup(2), [[2.0, 0.0], [0.0, -1.0]])
    result = ApproxService.construct_dp_supnorm_target(T)
    assert result.distance == 0.0


def test_threshold_construction():
    T = LatticeOperator(LatticeSpace.sup(2), LatticeSpace.sup(3), [[1.0, 0.001], [0.002, 1.0], [0.5, 0.0]])
    result = ApproxService.construct_dp_threshold(T, 0.01)
    assert result.S.is_dp()
    assert result.certified
    assert result.distance <= 257 * 0.01


def test_threshold_on_weighted_domain_cuts_normalized_atoms():
    matrix = [[2.0, 0.05], [0.3, 1.0]]
    T = LatticeOperator(LatticeSpace.weighted(1, [4.0, 1.0]), LatticeSpace.sup(2), matrix)
    result = ApproxService.construct_dp_threshold(T, 0.1)
    assert np.array_equal(result.S.matrix, [[2.0, 0.0], [0.0, 1.0]])
    assert not result.certified
    with pytest.raises(NotEpsDisjointError):
        ApproxService.construct_dp_threshold(
            LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.sup(2), matrix), 0.1
        )


def test_threshold_rejects_crowded_rows():
    T = LatticeOperator(LatticeSpace.sup(2), LatticeSpace.sup(1), [[1.0, 1.0]])
    with pytest.raises(NotEpsDisjointError):
        ApproxService.construct_dp_threshold(T, 0.1)
    with pytest.raises(InputParseError):
        ApproxService.construct_dp_threshold(T, 0.0)


@pytest.mark.parametrize('shape', ((3, 6), (4, 8)))
@pytest.mark.parametrize('seed', range(50))
def test_l1_target_pipeline(shape, seed):
    n, m = shape
    inst = InstanceService.perturbed_dp_instance(n, m, 1e-3, seed=seed)
    T, eps = inst.operator, inst.eps_analytic
    result = ApproxService.approximate_l1_target(T, eps, seed=seed)
    assert result.certified
    assert result.certificates["heuristic_objective"] >= result.certificates["optimum"] * (1 - 1e-12)
    c = 2 * math.sqrt(2 * eps * result.certificates["norm_T"] / 3)
    assert result.distance <= min(256 * eps, c) + 1e-12
    # the distance is the dual norm of the residual column norms
    residual = T.minus(result.S).column_norms()
    assert result.distance == pytest.approx(T.domain.dual_norm(residual), rel=1e-12, abs=1e-15)
    norm = OperatorNormService.operator_norm(T.minus(result.S)).upper
    assert result.distance == pytest.approx(norm, rel=1e-12, abs=1e-15)
    assert result.certificates["oracle_ratio"] >= 1 - 1e-12


def test_l1_target_needs_l1_codomain():
    T = LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.lp(2, 2), np.ones((2, 2)))
    with pytest.raises(IncompatibleNormError):
        ApproxService.approximate_l1_target(T)


@pytest.mark.parametrize('q', (2.0, 3.0))
@pytest.mark.parametrize('seed', range(4))
def test_lq_pipeline(q, seed):
    inst = InstanceService.perturbed_dp_instance(
        3, 6, 1e-3, seed=seed, domain=LatticeSpace.lp(3, q), codomain=LatticeSpace.lp(6, q)
    )
    T, eps = inst.operator, inst.eps_analytic
    transferred = ApproxService.power_transfer(T, q)
    assert DefectService.dp_defect_search(transferred, seed=seed, restarts=2).lower_bound <= eps ** q + 1e-6

    result = ApproxService.approximate_lq_target(T, eps=eps, seed=seed)
    assert result.S.is_dp() and result.dominated
    assert result.distance <= result.certificates["theorem"] + 1e-12
    back = ApproxService.root_transfer(transferred, q)
    assert np.allclose(back.matrix, T.matrix, rtol=1e-12)


def test_lq_pipeline_rejects_mismatched_exponents():
    T = LatticeOperator(LatticeSpace.lp(2, 2), LatticeSpace.lp(2, 3), np.ones((2, 2)))
    with pytest.raises(IncompatibleNormError):
        ApproxService.approximate_lq_target(T)


@pytest.mark.parametrize('seed', range(4))
def test_lq_pipeline_checks_the_upper_distance(seed):
    q = 3.0
    inst = InstanceService.perturbed_dp_instance(
        3, 6, 1e-3, seed=seed, domain=LatticeSpace.lp(3, q), codomain=LatticeSpace.lp(6, q)
    )
    result = ApproxService.approximate_lq_target(inst.operator, eps=inst.eps_analytic, seed=seed)
    assert not result.distance_exact
    assert result.distance == result.certificates["distance_upper"]
    assert result.certificates["distance_lower"] <= result.distance * (1 + 1e-12)
    assert result.certificates["distance_upper"] <= result.bound
    assert result.certificates["bound_verified"]
