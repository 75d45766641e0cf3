import json

import pytest

from aucteq.cli import main
from aucteq.construct import construct_table1
from aucteq.serialization import dumps_equilibrium


@pytest.fixture
def table1_file(tmp_path):
    path = tmp_path / "table1.json"
    path.write_text(dumps_equilibrium(*construct_table1(1e-4)))
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_welfare_min(capsys):
    code, out, _ = run_cli(capsys, "bound", "welfare-min")
    data = json.loads(out)
    assert code == 0
    assert data["alpha"] == pytest.approx(0.274322, abs=1e-6)
    assert data["value"] == pytest.approx(0.813559, abs=1e-6)


@pytest.mark.parametrize("argv,key,expected", [
    (("bound", "revenue-floor"), "value", 0.2642411176571153),
    (("bound", "symmetric", "--n", "3", "--value", "1"), "value", 0.5939941502901619),
    (("bound", "gap", "--eps", "0.1"), "value", 3.24e6),
    (("bound", "welfare-lb", "--alpha", "0.3", "--beta", "0", "--v", "0.7"), "value", 1.0),
])
def test_bound_subcommands(capsys, argv, key, expected):
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0 and json.loads(out)[key] == pytest.approx(expected, rel=1e-12)


def test_verify_table1(capsys, table1_file):
    code, out, _ = run_cli(capsys, "verify", "--input", str(table1_file), "--mode", "cce", "--tol", "0.005")
    assert code == 0 and json.loads(out)["pass"]
    code, out, _ = run_cli(capsys, "verify", "--input", str(table1_file), "--mode", "ce", "--tol", "0.005")
    worst = json.loads(out)["worst_conditional_deviation"]
    assert code == 1
    assert worst["player"] == 0 and worst["conditional_gain"] == pytest.approx(1.9999)


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"values": [1,\n')
    code, _, err = run_cli(capsys, "verify", "--input", str(bad))
    assert code == 2 and "line 2, column 1" in err


def test_schema_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"values": [1, 1], "atoms": [{"p": "0.5", "bids": [0, 0], "winner_shares": {"1": 1}}]}')
    code, _, err = run_cli(capsys, "verify", "--input", str(bad))
    assert code == 2 and "probabilities" in err


def test_missing_file_and_bad_flag(capsys, tmp_path):
    assert run_cli(capsys, "verify", "--input", str(tmp_path / "none.json"))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["lp", "--values", "a,b", "--grid", "4"])
    assert exc.value.code == 2


def test_construct_worst_welfare_with_grid(capsys):
    code, out, _ = run_cli(capsys, "construct", "worst-welfare", "--optimal", "--grid", "50")
    data = json.loads(out)
    assert code == 0
    assert data["summary"]["welfare"] == pytest.approx(0.8135594, abs=1e-7)
    assert data["discretized"]["max_regret"] < 0.02


def test_construct_nash_mixture(capsys):
    code, out, _ = run_cli(capsys, "construct", "nash-mixture", "--values", "2,1", "--prices", "1:0.5,2:0.5")
    assert code == 0 and json.loads(out)["summary"]["revenue"] == pytest.approx(1.5)


def test_lp_writes_output(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "--output", str(tmp_path), "lp", "--values", "2,1", "--grid", "10",
                           "--class", "ce", "--objective", "welfare")
    data = json.loads(out)
    assert code == 0 and data["value"] == pytest.approx(2.0)
    assert json.loads((tmp_path / "lp.json").read_text()) == data


def test_simulate_writes_trajectory(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "--output", str(tmp_path), "simulate", "--values", "1,1", "--grid", "10",
                           "--rounds", "500", "--seed", "1")
    assert code == 0 and json.loads(out)["rounds"] == 500
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "round,avg_welfare,avg_revenue" and rows[-1].startswith("500,")


def test_simulate_seed_from_env(capsys, monkeypatch):
    monkeypatch.setenv("AUCTEQ_SEED", "99")
    _, out, _ = run_cli(capsys, "simulate", "--values", "1,1", "--grid", "4", "--rounds", "10")
    assert json.loads(out)["seed"] == 99


def test_reduce(capsys, tmp_path):
    src = tmp_path / "three.json"
    src.write_text(json.dumps({
        "values": ["1.0", "0.8", "0.5"],
        "atoms": [
            {"p": "0.5", "bids": ["0.2", "0.1", "0.4"], "winner_shares": {"3": "1"}},
            {"p": "0.5", "bids": ["0.3", "0.3", "0.0"], "winner_shares": {"1": "1"}},
        ],
    }))
    code, out, _ = run_cli(capsys, "reduce", "--input", str(src))
    data = json.loads(out)
    assert code == 0
    assert data["after"]["revenue"] == pytest.approx(data["before"]["revenue"])
    assert len(data["equilibrium"]["values"]) == 2
    assert run_cli(capsys, "reduce", "--input", str(src.with_name("missing.json")))[0] == 2


def test_cdf_samples(capsys):
    code, out, _ = run_cli(capsys, "cdf", "--reciprocal", "0.25,1", "--samples", "4")
    assert code == 0
    assert out.splitlines() == ["x,F", "0.0,0.25", "0.25,0.3333333333333333", "0.5,0.5", "0.75,1.0"]


def test_report_subset(capsys, tmp_path):
    code, out, _ = run_cli(capsys, "--output", str(tmp_path), "report", "--criteria", "1,2,4")
    assert code == 0
    assert out.count("[PASS]") == 3
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["pass"] and [c["criterion"] for c in report["criteria"]] == [1, 2, 4]
    assert (tmp_path / "acceptance.csv").read_text().startswith("criterion,label,computed")
    assert run_cli(capsys, "report", "--criteria", "99")[0] == 2
