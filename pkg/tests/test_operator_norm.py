import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays
from hypothesis import strategies as st

from lattice_dp.models import LatticeOperator, LatticeSpace
from lattice_dp.services import InstanceService, OperatorNormService

entries = st.floats(min_value=-5, max_value=5, allow_nan=False, allow_infinity=False)


def test_l1_domain_norm_is_max_column_norm():
    T = LatticeOperator(LatticeSpace.lp(2, 1), LatticeSpace.lp(2, 2), [[3.0, 1.0], [4.0, 1.0]])
    bounds = OperatorNormService.operator_norm(T)
    assert bounds.exact and bounds.method == 'l1_domain_columns'
    assert bounds.upper == pytest.approx(5.0)


def test_spectral_norm():
    space = LatticeSpace.lp(2, 2)
    T = LatticeOperator(space, space, [[2.0, 0.0], [0.0, -3.0]])
    bounds = OperatorNormService.operator_norm(T)
    assert bounds.method == 'spectral'
    assert bounds.best == pytest.approx(3.0)


def test_sup_codomain_rows():
    T = LatticeOperator(LatticeSpace.lp(2, 2), LatticeSpace.sup(2), [[3.0, 4.0], [1.0, 0.0]])
    assert OperatorNormService.operator_norm(T).upper == pytest.approx(5.0)


def test_sign_vertices_for_signed_sup_domain():
    T = LatticeOperator(LatticeSpace.sup(2), LatticeSpace.lp(2, 2), [[1.0, 1.0], [1.0, -1.0]])
    bounds = OperatorNormService.operator_norm(T)
    assert bounds.method == 'sign_vertices'
    assert bounds.upper == pytest.approx(2.0)


def test_weights_are_reduced():
    T = LatticeOperator(LatticeSpace.weighted(1, [4.0, 1.0]), LatticeSpace.lp(1, 1), [[2.0, 1.0]])
    # ‖δ_0‖ = 4, so the first column contributes 2 / 4
    assert OperatorNormService.operator_norm(T).upper == pytest.approx(1.0)


@pytest.mark.parametrize('N,p,q', ((2, 1, 2), (3, 1, 2), (16, 1, 2), (4, 2, 3)))
def test_graph_interpolation_bound(N, p, q):
    T = InstanceService.graph_operator(N, p, q).operator
    assert OperatorNormService.interpolation_bound(T) == pytest.approx(2.0 ** (1.0 - 1.0 / q), rel=1e-12)


def test_interpolation_needs_p_at_most_q():
    T = LatticeOperator(LatticeSpace.lp(2, 3), LatticeSpace.lp(2, 2), np.eye(2))
    assert OperatorNormService.interpolation_bound(T) is None


@given(matrix=arrays(np.float64, (3, 3), elements=entries))
@settings(max_examples=40, deadline=None)
def test_bounds_are_ordered(matrix):
    T = LatticeOperator(LatticeSpace.lp(3, 3), LatticeSpace.lp(3, 1.5), matrix)
    bounds = OperatorNormService.operator_norm(T, seed=1)
    assert bounds.lower <= bounds.certified_upper * (1 + 1e-9) + 1e-12
    assert bounds.certified_upper <= OperatorNormService.triangle_bound(T) * (1 + 1e-9) + 1e-12


def test_power_iteration_finds_lp_norm_of_rank_one():
    u = np.array([1.0, 2.0, 2.0])
    v = np.array([3.0, 4.0])
    T = LatticeOperator(LatticeSpace.lp(2, 3), LatticeSpace.lp(3, 3), np.outer(u, v))
    lower, x = OperatorNormService.lower_bound_search(T, 200)
    expected = LatticeSpace.lp(3, 3).norm(u) * LatticeSpace.lp(2, 1.5).norm(v)
    assert lower == pytest.approx(expected, rel=1e-6)
    assert LatticeSpace.lp(2, 3).norm(x) == pytest.approx(1.0)
    assert not math.isnan(lower)
