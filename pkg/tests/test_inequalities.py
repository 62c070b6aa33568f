import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_dp.models import LatticeOperator, LatticeSpace
from lattice_dp.services import InequalityService
from lattice_dp.services.inequality_service import dyadic_space, gray_subset_sums
from lattice_dp.utils.exceptions import (
    DimensionError,
    IncompatibleNormError,
    InputParseError,
    InstanceTooLargeError,
    NegativeInputError,
    NotDisjointError,
)


def naive_split(b):
    total = sum(b)
    values = []
    for picks in itertools.product((0, 1), repeat=len(b)):
        s = sum(x for x, take in zip(b, picks) if take)
        values.append(min(s, total - s))
    return math.fsum(values) / 2 ** len(b)


@pytest.mark.parametrize('b,expected', (
    ([1.0, 1.0], 0.5),
    ([1.0, 2.0, 3.0], 1.5),
    ([4.0], 0.0),
    ([0.0, 0.0, 0.0], 0.0),
))
def test_split_expectation_values(b, expected):
    result = InequalityService.split_expectation(b)
    assert result.exact
    assert result.value == pytest.approx(expected)


@given(st.lists(st.floats(min_value=0, max_value=10, allow_nan=False), min_size=1, max_size=10))
@settings(max_examples=40, deadline=None)
def test_split_expectation_matches_enumeration(b):
    assert InequalityService.expected_min_split(b) == pytest.approx(naive_split(b), rel=1e-9, abs=1e-12)


def test_gray_subset_sums_cover_every_subset():
    sums = gray_subset_sums([1.0, 2.0, 4.0])
    assert sorted(sums) == list(range(8))
    # consecutive subsets differ by one element
    assert np.all(np.isin(np.abs(np.diff(sums)), [1.0, 2.0, 4.0]))


def test_monte_carlo_estimate_is_close():
    b = np.random.default_rng(3).random(12)
    exact = InequalityService.split_expectation(b).value
    estimate = InequalityService.expected_min_split_mc(b, samples=20000, seed=1)
    assert not estimate.exact
    assert estimate.samples == 20000
    assert abs(estimate.value - exact) <= 5 * estimate.stderr + 1e-12


def test_long_vectors_fall_back_to_sampling():
    b = np.ones(26)
    with pytest.raises(InstanceTooLargeError):
        InequalityService.split_expectation(b, exact_only=True)
    result = InequalityService.split_expectation(b)
    assert not result.exact and result.stderr is not None


def test_split_expectation_rejects_negative_entries():
    with pytest.raises(NegativeInputError):
        InequalityService.split_expectation([1.0, -0.5])


@pytest.mark.parametrize('b', (np.ones(12), np.eye(12)[0], 0.5 ** np.arange(12), [7.0]))
def test_maxmin_sandwich_edge_cases(b):
    report = InequalityService.maxmin_sandwich_check(b)
    assert report.holds
    assert report.values["lhs"] <= report.values["mid"] + 1e-12


def test_sandwich_on_one_hot_has_no_ratio():
    report = InequalityService.maxmin_sandwich_check(np.eye(5)[2])
    assert report.values["mid"] == 0.0
    assert report.values["ratio"] is None


@pytest.mark.parametrize('q', (1.0, 2.0, 3.0, math.inf))
def test_vector_split_holds(q):
    rng = np.random.default_rng(int(q) if math.isfinite(q) else 9)
    space = LatticeSpace.lp(4, q) if math.isfinite(q) else LatticeSpace.sup(4)
    report = InequalityService.vector_split_check(rng.random((6, 4)), space)
    assert report.holds
    assert report.values["coord_holds"] and report.values["norm_holds"]


def test_vector_split_limits():
    with pytest.raises(DimensionError):
        InequalityService.vector_split_check(np.ones((3, 2)), LatticeSpace.lp(3, 2))
    with pytest.raises(InstanceTooLargeError):
        InequalityService.vector_split_check(np.ones((21, 1)), LatticeSpace.lp(1, 2))


def test_operator_checks_on_lattice_homomorphism(identity3):
    family = [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.5]]
    report = InequalityService.arb_number_check(identity3, family, 2, eps=0.0)
    assert report.holds
    assert report.values["sum_lhs"] == 0.0
    assert report.values["p_lhs"] == pytest.approx(0.0, abs=1e-15)

    xs = np.random.default_rng(0).random((3, 3))
    assert InequalityService.maxmin_operator_check(identity3, xs, eps=0.0).holds
    ball = xs / np.maximum(identity3.domain.norms(xs), 1.0)[:, None]
    assert InequalityService.iterated_join_check(identity3, ball, 0.0).values["lhs"] == 0.0


def test_operator_check_errors(identity3):
    with pytest.raises(NotDisjointError):
        InequalityService.arb_number_check(identity3, [[1.0, 1.0, 0.0], [0.0, 1.0, 0.0]], 2, eps=0.1)
    with pytest.raises(InputParseError):
        InequalityService.iterated_join_check(identity3, [[2.0, 0.0, 0.0]], 0.1)


def test_maxmin_operator_on_non_dp_operator(equal_columns):
    # both atoms land on the same vector, so join and meet are each off by a full column
    report = InequalityService.maxmin_operator_check(equal_columns, [[1.0, 0.0], [0.0, 1.0]], eps=1.0)
    assert report.values["join_gap"] == pytest.approx(1.0)
    assert report.values["meet_gap"] == pytest.approx(1.0)
    assert report.holds


def test_sphere_net_on_the_circle():
    net = InequalityService.sphere_net(2.0, 4)
    points = net.as_array()
    assert points.shape == (5, 2)
    assert tuple(points[0]) == (1.0, 0.0) and tuple(points[-1]) == (0.0, 1.0)
    angles = np.arctan2(points[:, 1], points[:, 0])
    assert np.allclose(angles, np.arange(5) * math.pi / 8, atol=1e-5)


@pytest.mark.parametrize('q', (1.5, 2.0, 3.0))
@pytest.mark.parametrize('N', (1, 4, 16))
def test_sphere_net_coverage(q, N):
    report = InequalityService.sphere_net_coverage(InequalityService.sphere_net(q, N))
    assert report.holds


@pytest.mark.parametrize('q', (1.5, 3.0))
def test_sphere_net_points_are_equally_spaced(q):
    points = InequalityService.sphere_net(q, 16).as_array()
    assert np.abs(points[:, 0] ** q + points[:, 1] ** q - 1.0).max() <= 1e-12
    chords = np.hypot(*np.diff(points, axis=0).T)
    assert chords.max() <= chords.min() * 1.01


def test_sphere_net_rejects_bad_parameters():
    with pytest.raises(InputParseError):
        InequalityService.sphere_net(1.0, 4)
    with pytest.raises(InputParseError):
        InequalityService.sphere_net(2.0, 0)


@pytest.mark.parametrize('seed', range(5))
def test_net_estimate(seed):
    rng = np.random.default_rng(seed)
    net = InequalityService.sphere_net(3.0, 16)
    report = InequalityService.net_estimate_check(rng.random(5), rng.random(5), 1.5, net)
    assert report.holds and report.values["dominated"]


def test_net_estimate_needs_conjugate_net():
    net = InequalityService.sphere_net(2.0, 4)
    with pytest.raises(IncompatibleNormError):
        InequalityService.net_estimate_check([1.0], [1.0], 3.0, net)
    with pytest.raises(InputParseError):
        InequalityService.net_estimate_check([1.0], [1.0], 1.0, net)


def test_refinement_demo_bounds():
    reports = InequalityService.refinement_norm_demo(2.0, 0.01, 1.0, 3.0, [1, 4, 16])
    bounds = [r.values["bound"] for r in reports]
    assert bounds == pytest.approx([2.56 + 3.0 * n ** -0.5 for n in (1, 4, 16)])
    assert all(r.holds is None for r in reports)
    with pytest.raises(InputParseError):
        InequalityService.refinement_norm_demo(1.0, 0.01, 1.0, 3.0, [1])


def test_refinement_demo_on_dyadic_identity():
    domain = dyadic_space(3, 1.0)
    T = LatticeOperator(domain, LatticeSpace.lp(8, 2), np.eye(8))
    reports = InequalityService.refinement_norm_demo(2.0, 0.0, 1.0, 1.0, [1, 2, 8], operator=T)
    for report in reports:
        assert report.values["p_estimate_gap"] == pytest.approx(0.0, abs=1e-12)
        assert report.values["norm_Tx"] == pytest.approx(math.sqrt(8))
    with pytest.raises(InputParseError):
        InequalityService.refinement_norm_demo(2.0, 0.0, 1.0, 1.0, [3], operator=T)
    plain = LatticeOperator(LatticeSpace.lp(8, 1), LatticeSpace.lp(8, 2), np.eye(8))
    with pytest.raises(IncompatibleNormError):
        InequalityService.refinement_norm_demo(2.0, 0.0, 1.0, 1.0, [1], operator=plain)


def test_sup_additivity():
    steps = np.random.default_rng(2).random((3, 5, 4))
    assert InequalityService.sup_additivity_check(np.cumsum(steps, axis=1)).holds
    with pytest.raises(InputParseError):
        InequalityService.sup_additivity_check(-np.cumsum(steps, axis=1) + 10.0)
    with pytest.raises(DimensionError):
        InequalityService.sup_additivity_check(np.ones((2, 3)))
