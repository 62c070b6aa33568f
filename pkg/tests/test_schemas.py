import math

import numpy as np
import pytest
from marshmallow import ValidationError

from lattice_dp.models import CheckReport, LatticeSpace, NormSpec, RunReport
from lattice_dp.schemas import CheckRowSchema, InstanceSchema, NormSchema, OperatorSchema, RunReportSchema, SpaceSchema
from lattice_dp.utils.exceptions import DimensionError, InputParseError
from lattice_dp.validation import validate_instance_input, validate_operator_input


def operator_json(**overrides):
    data = {
        "domain": {"dim": 2, "norm": {"kind": "lp", "p": 1}},
        "codomain": {"dim": 3, "norm": {"kind": "sup", "p": "inf"}},
        "matrix": [[1, 0], [0, 2], [0.5, 0.5]],
    }
    data.update(overrides)
    return data


@pytest.mark.parametrize('payload,expected', (
    ({"kind": "sup"}, NormSpec.sup()),
    ({"kind": "sup", "p": "inf"}, NormSpec.sup()),
    ({"kind": "lp", "p": 2}, NormSpec.lp(2)),
    ({"kind": "lp", "p": "3"}, NormSpec.lp(3)),
    ({"kind": "weighted_lp", "p": 1.5, "weights": [1, 2]}, NormSpec.weighted(1.5, [1.0, 2.0])),
    ({"kind": "lp", "p": 2, "comment": "ignored"}, NormSpec.lp(2)),
))
def test_norm_schema_loads(payload, expected):
    assert NormSchema().load(payload) == expected


@pytest.mark.parametrize('payload', (
    {"kind": "sup", "p": 2},
    {"kind": "lp"},
    {"kind": "lp", "p": 0.5},
    {"kind": "lp", "p": True},
    {"kind": "lp", "p": 2, "weights": [1.0]},
    {"kind": "weighted_lp", "p": 2},
    {"kind": "orlicz", "p": 2},
    {"p": 2},
))
def test_norm_schema_rejects(payload):
    with pytest.raises(ValidationError):
        NormSchema().load(payload)


def test_nonpositive_weights_are_parse_errors():
    with pytest.raises(InputParseError):
        NormSchema().load({"kind": "weighted_lp", "p": 2, "weights": [1.0, 0.0]})


def test_norm_schema_dumps():
    assert NormSchema().dump(NormSpec.sup()) == {"kind": "sup", "p": "inf"}
    assert NormSchema().dump(NormSpec.lp(2)) == {"kind": "lp", "p": 2.0}
    assert NormSchema().dump(NormSpec.weighted(1, [2, 3])) == {"kind": "weighted_lp", "p": 1.0, "weights": [2.0, 3.0]}


def test_space_schema():
    space = SpaceSchema().load({"dim": 4, "norm": {"kind": "lp", "p": 2}})
    assert space == LatticeSpace.lp(4, 2)
    assert SpaceSchema().dump(LatticeSpace.sup(2)) == {"dim": 2, "norm": {"kind": "sup", "p": "inf"}}
    for bad in ({"dim": 0, "norm": {"kind": "sup"}}, {"dim": "3", "norm": {"kind": "sup"}}, {"dim": 3}):
        with pytest.raises(ValidationError):
            SpaceSchema().load(bad)


def test_weight_length_mismatch_is_a_dimension_error():
    with pytest.raises(DimensionError):
        SpaceSchema().load({"dim": 3, "norm": {"kind": "weighted_lp", "p": 2, "weights": [1, 1]}})


def test_operator_schema_builds_operator():
    T = OperatorSchema().load(operator_json())
    assert (T.m, T.n) == (3, 2)
    assert T.domain == LatticeSpace.lp(2, 1) and T.codomain.is_sup
    assert np.array_equal(T.matrix, [[1, 0], [0, 2], [0.5, 0.5]])


def test_operator_shape_errors():
    with pytest.raises(DimensionError):
        OperatorSchema().load(operator_json(matrix=[[1, 0], [0]]))
    with pytest.raises(DimensionError):
        OperatorSchema().load(operator_json(matrix=[[1, 0], [0, 2]]))


def test_validate_operator_input_collects_messages():
    operator, errors = validate_operator_input({"domain": {"dim": 2, "norm": {"kind": "lp", "p": 1}}})
    assert operator is None
    assert "codomain" in errors and "matrix" in errors

    operator, errors = validate_operator_input(operator_json())
    assert errors is None and operator.n == 2


def test_instance_schema_meta():
    loaded, errors = validate_instance_input(operator_json())
    assert errors is None and loaded["meta"] == {}
    loaded, _ = validate_instance_input(operator_json(meta={"kind": "perturbed", "eps_analytic": 0.01}))
    assert loaded["meta"]["eps_analytic"] == 0.01

    T = loaded["operator"]
    dumped = InstanceSchema().dump({"domain": T.domain, "codomain": T.codomain, "matrix": T.matrix,
                                    "meta": loaded["meta"]})
    assert dumped["codomain"]["norm"] == {"kind": "sup", "p": "inf"}
    assert dumped["matrix"][2] == [0.5, 0.5]


def test_check_rows_are_flat_and_plain():
    report = CheckReport("net_estimate", True, {"lhs": np.float64(0.25), "coords": np.arange(3)}, "N=4")
    row = CheckRowSchema().dump(report)
    assert row == {"check": "net_estimate", "holds": True, "instance": "N=4", "exact": True,
                   "lhs": 0.25, "coords": [0, 1, 2]}
    assert type(row["lhs"]) is float

    undecided = CheckRowSchema().dump(CheckReport("graph_dp_distance", None, {"holds": "shadowed"}))
    assert undecided["holds"] is None


def test_run_report_schema():
    report = RunReport("verify", "abc", rows=[{"value": np.float64(1.5), "inf": math.inf}], timing=0.5)
    dumped = RunReportSchema().dump(report)
    assert dumped["rows"] == [{"value": 1.5, "inf": math.inf}]
    assert dumped["timing"] == 0.5
    assert "timing" not in RunReportSchema(exclude=("timing",)).dump(report)
