import csv
import json

import pytest
from click.testing import CliRunner

from lattice_dp import create_app
from lattice_dp.cli import cli
from lattice_dp.models import CheckReport
from lattice_dp.services.suite_service import SuiteService


@pytest.fixture
def runner():
    yield CliRunner(mix_stderr=False, env={"LATTICE_DP_ENV": "testing"})
    # the group callback bound logging to the runner's captured stderr
    create_app("testing")


@pytest.fixture
def perturbed_file(runner, tmp_path):
    path = tmp_path / "perturbed.json"
    result = runner.invoke(cli, ["example", "--kind", "perturbed", "--n", "3", "--m", "6", "--eta", "0.001",
                                 "--seed", "4", "--out", str(path)])
    assert result.exit_code == 0, result.stderr
    return path


def write(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(payload if isinstance(payload, str) else json.dumps(payload))
    return str(path)


def test_example_prints_instance_json(runner):
    result = runner.invoke(cli, ["example", "--kind", "graph", "--N", "3", "--p", "1", "--q", "2"])
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document["meta"] == {"kind": "graph", "N": 3, "p": 1.0, "q": 2.0}
    assert document["domain"] == {"dim": 4, "norm": {"kind": "lp", "p": 1.0}}
    assert len(document["matrix"]) == 6


def test_example_with_out_reports(runner, tmp_path, perturbed_file):
    document = json.loads(perturbed_file.read_text())
    assert document["meta"]["eps_analytic"] == pytest.approx(0.002)
    report = json.loads(runner.invoke(cli, ["example", "--kind", "walsh", "--kmin", "1", "--kmax", "2",
                                            "--out", str(tmp_path / "w.json")]).stdout)
    assert report["command"] == "example"
    assert report["rows"][0]["domain_dim"] == 6
    assert "timing" not in report


def test_defect_command(runner, perturbed_file):
    result = runner.invoke(cli, ["defect", str(perturbed_file), "--mode", "search", "--restarts", "2", "--timing"])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report["command"] == "defect"
    assert report["rows"][0]["mode"] == "search"
    assert report["rows"][0]["lower_bound"] <= 0.002 + 1e-6
    assert report["timing"] >= 0


@pytest.mark.parametrize('mode', ("indicator", "mp", "lh", "sdp"))
def test_defect_modes(runner, perturbed_file, mode):
    result = runner.invoke(cli, ["defect", str(perturbed_file), "--mode", mode])
    assert result.exit_code == 0, result.stderr


def test_approx_uses_meta_eps(runner, perturbed_file, tmp_path):
    out = tmp_path / "approx.json"
    result = runner.invoke(cli, ["approx", str(perturbed_file), "--method", "l1", "--out", str(out)])
    assert result.exit_code == 0, result.stderr
    row = json.loads(result.stdout)["rows"][0]
    assert row["eps_used"] == pytest.approx(0.002)
    assert row["is_dp"] and row["dominated"] and row["certified"]
    assert row["distance"] <= row["bound"]
    assert out.exists()


def test_reports_are_deterministic(runner, perturbed_file):
    args = ["defect", str(perturbed_file), "--mode", "search", "--seed", "7"]
    assert runner.invoke(cli, args).stdout == runner.invoke(cli, args).stdout
    args = ["verify", "--suite", "maxmin", "--trials", "5", "--seed", "3"]
    assert runner.invoke(cli, args).stdout == runner.invoke(cli, args).stdout


def test_verify_writes_csv(runner, tmp_path):
    path = tmp_path / "rows.csv"
    result = runner.invoke(cli, ["verify", "--suite", "vector", "--trials", "4", "--csv", str(path)])
    assert result.exit_code == 0, result.stderr
    with open(path, newline='') as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 4
    assert {row["check"] for row in rows} == {"vector_split"}
    assert json.loads(rows[0]["coord_lhs"])


def test_verify_failure_exits_1(runner, monkeypatch):
    failing = [CheckReport("maxmin_sandwich", True), CheckReport("maxmin_sandwich", False, instance="bad")]
    monkeypatch.setattr(SuiteService, "run", staticmethod(lambda suite, seed=0, trials=None: failing))
    result = runner.invoke(cli, ["verify", "--suite", "maxmin"])
    assert result.exit_code == 1
    assert len(json.loads(result.stdout)["rows"]) == 2
    assert "bad" in result.stderr


def test_malformed_json_exits_2(runner, tmp_path):
    result = runner.invoke(cli, ["defect", write(tmp_path, "bad.json", "{not json")])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["defect", write(tmp_path, "list.json", [1, 2])])
    assert result.exit_code == 2
    result = runner.invoke(cli, ["defect", write(tmp_path, "partial.json", {"matrix": [[1]]})])
    assert result.exit_code == 2


def test_bad_parameters_exit_2(runner, tmp_path):
    result = runner.invoke(cli, ["example", "--kind", "graph", "--N", "1"])
    assert result.exit_code == 2
    graph = write(tmp_path, "graph.json", json.loads(runner.invoke(cli, ["example", "--kind", "graph"]).stdout))
    result = runner.invoke(cli, ["approx", graph, "--method", "threshold"])
    assert result.exit_code == 2


def test_dimension_error_exits_3(runner, tmp_path):
    payload = {
        "domain": {"dim": 2, "norm": {"kind": "lp", "p": 1}},
        "codomain": {"dim": 2, "norm": {"kind": "lp", "p": 1}},
        "matrix": [[1, 0], [0]],
    }
    assert runner.invoke(cli, ["defect", write(tmp_path, "ragged.json", payload)]).exit_code == 3
    payload["matrix"] = [[1, 0, 0], [0, 1, 0]]
    assert runner.invoke(cli, ["defect", write(tmp_path, "wide.json", payload)]).exit_code == 3


def test_incompatible_method_exits_4(runner, perturbed_file):
    # perturbed instances default to an l1 domain, which phi_n does not accept
    result = runner.invoke(cli, ["approx", str(perturbed_file), "--method", "phi"])
    assert result.exit_code == 4
    assert "sup norm" in result.stderr


def test_threshold_on_crowded_rows_exits_4(runner, tmp_path):
    payload = {
        "domain": {"dim": 2, "norm": {"kind": "sup", "p": "inf"}},
        "codomain": {"dim": 1, "norm": {"kind": "sup", "p": "inf"}},
        "matrix": [[1, 1]],
    }
    result = runner.invoke(cli, ["approx", write(tmp_path, "crowded.json", payload), "--method", "threshold",
                                 "--eps", "0.1"])
    assert result.exit_code == 4
    assert "more than one entry above eps" in result.stderr


def test_verify_joins_suite(runner):
    result = runner.invoke(cli, ["verify", "--suite", "joins", "--trials", "3", "--seed", "2"])
    assert result.exit_code == 0, result.stderr
    rows = json.loads(result.stdout)["rows"]
    assert len(rows) == 9
    assert {row["check"] for row in rows} == {"iterated_join", "sup_additivity", "defect_connections"}
    connections = [row for row in rows if row["check"] == "defect_connections"]
    assert all(abs(row["mp_search"] - row["dp_search"]) <= 1e-5 for row in connections)
