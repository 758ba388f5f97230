import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from actuplace import cli
from actuplace.network import DirectedNetwork, dump_network, parse_network

from helpers import example1

DATA = Path(__file__).resolve().parents[1] / "data"


@pytest.fixture
def net_file(tmp_path):
    path = tmp_path / "ex.json"
    path.write_text(dump_network(example1()))
    return path


def run(capsys, *argv):
    code = cli.dispatch([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_min_k(capsys, net_file):
    doc = run_json(capsys, "min-k", "--net", net_file)
    assert doc["k_min"] == 2 and doc["max_matching"] == 2
    assert doc["command"]["name"] == "min-k"
    assert len(doc["input_digest"]) == 64
    assert doc["wall_time"] >= 0


def test_checks(capsys, net_file):
    assert run_json(capsys, "check-forward", "--net", net_file, "--k", 3, "--set", "1")["feasible"]
    assert not run_json(capsys, "check-forward", "--net", net_file, "--k", 2, "--set", "1")["feasible"]
    doc = run_json(capsys, "check-reverse", "--net", net_file, "--k", 2, "--set", "1")
    assert doc["feasible"] and doc["exclusions"] == ["1"]
    assert not run_json(capsys, "check-reverse", "--net", net_file, "--k", 2, "--set", "3,4")["feasible"]


@pytest.mark.parametrize("method, chosen", [("forward", ["3", "4"]), ("brute", ["3", "4"]),
                                            ("reverse", None), ("random", ["3", "4"])])
def test_solve(capsys, net_file, method, chosen):
    doc = run_json(capsys, "solve", "--net", net_file, "--k", 2, "--t", 2, "--eps", 1e-9,
                   "--method", method, "--samples", 200)
    res = doc["result"]
    assert len(res["chosen"]) == 2
    if chosen:
        assert res["chosen"] == chosen
    assert res["f_eps"] > 0


def test_solve_writes_out_file(capsys, net_file, tmp_path):
    out = tmp_path / "r.json"
    run_json(capsys, "solve", "--net", net_file, "--k", 2, "--out", out)
    assert json.loads(out.read_text())["result"]["K"] == 2


def test_epsilon(capsys, net_file):
    doc = run_json(capsys, "epsilon", "--net", net_file, "--k", 2, "--t", 2, "--method", "reverse")
    run_ = doc["epsilon_run"]
    assert run_["guarantee_holds"] is True
    assert run_["iterations"][0]["eps"] == 1e-3


@pytest.mark.parametrize("method", ["forward", "reverse"])
def test_guarantee(capsys, net_file, method):
    doc = run_json(capsys, "guarantee", "--net", net_file, "--k", 2, "--t", 2, "--eps", 1e-3,
                   "--method", method, "--exact")
    assert len(doc["reports"]) == 2
    assert all(r["holds"] for r in doc["reports"])


def test_table1(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["N"] for r in rows] == ["20", "100", "20"]
    assert float(rows[0]["z_bar"]) == pytest.approx(4.87268)
    assert float(rows[1]["z_u"]) == pytest.approx(8.32159)


def test_gen_round_trips(capsys, tmp_path):
    doc = run_json(capsys, "gen", "--seed", 3)
    assert doc["degree_sum"] == 144 and len(doc["degrees"]) == 23
    net = parse_network(json.dumps(doc["network"]))
    assert net.n == 23
    np.testing.assert_array_equal(net.weights.sum(axis=0), doc["degrees"])
    small = run_json(capsys, "gen", "--degrees", "2,2,2")
    assert small["network"]["n"] == 3


def test_swing(capsys):
    doc = run_json(capsys, "swing", "--buses", DATA / "buses.csv", "--branches", DATA / "branches.csv")
    assert doc["network"]["n"] == 6
    assert doc["strongly_connected"] is True


def test_verify(capsys, net_file):
    doc = run_json(capsys, "verify", "--net", net_file, "--t", 2)
    assert doc["disagreements"] == [] and doc["sets_checked"] == 6 + 4 + 1
    assert doc["gramian_max_relative_error"] < 1e-7


def test_verify_reports_disagreement(capsys, net_file, monkeypatch):
    monkeypatch.setattr(cli, "randomized_structurally_controllable", lambda *a, **k: False)
    code, out, err = run(capsys, "verify", "--net", net_file)
    assert code == 1 and "check failed" in err
    assert len(json.loads(out)["disagreements"]) == 3 + 4 + 1  # every feasible set


@pytest.mark.parametrize("argv, code", [
    (["solve", "--net", "{net}", "--k", "1"], 1),  # below K_min
    (["solve", "--net", "{net}", "--k", "9"], 2),  # more than n
    (["solve", "--net", "{net}", "--k", "2", "--t", "0"], 2),
    (["solve", "--net", "{net}", "--k", "2", "--eps", "-1"], 2),
    (["check-forward", "--net", "{net}", "--k", "2", "--set", "7"], 2),
    (["min-k", "--net", "missing.json"], 2),
    (["frobnicate"], 2),
    (["solve", "--net", "{net}"], 2),
    (["epsilon", "--net", "{net}", "--k", "2", "--xi", "0"], 2),
])
def test_exit_codes(capsys, net_file, argv, code):
    argv = [a.replace("{net}", str(net_file)) for a in argv]
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err


def test_malformed_network_file(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "min-k", "--net", bad)[0] == 2
    oneway = tmp_path / "oneway.json"
    oneway.write_text('{"n": 2, "edges": [{"from": 0, "to": 1, "w": 1}]}')
    assert run(capsys, "min-k", "--net", oneway)[0] == 2


def test_jobs_from_environment(monkeypatch):
    monkeypatch.setenv("ACTUPLACE_JOBS", "3")
    assert cli._jobs(None) == 3
    assert cli._jobs(5) == 5
    monkeypatch.setenv("ACTUPLACE_JOBS", "many")
    with pytest.raises(cli.InputError):
        cli._jobs(None)


def test_non_finite_values_become_null():
    assert cli._clean({"a": float("inf"), "b": (1, np.float64(2.5)), "c": np.bool_(True)}) == \
        {"a": None, "b": [1, 2.5], "c": True}


def test_module_entry_point(net_file):
    proc = subprocess.run([sys.executable, "-m", "actuplace", "min-k", "--net", str(net_file)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["k_min"] == 2


@pytest.mark.parametrize("method", ["forward", "reverse"])
def test_echoed_command_reproduces_report(capsys, net_file, method):
    first = run_json(capsys, "solve", "--net", net_file, "--k", 2, "--method", method, "--jobs", 2)
    again = run_json(capsys, *first["command"]["argv"])
    assert again["result"]["chosen"] == first["result"]["chosen"]
    assert again["result"]["trace"] == first["result"]["trace"]
    assert again["input_digest"] == first["input_digest"]


def test_compare(capsys, net_file):
    doc = run_json(capsys, "compare", "--net", net_file, "--k", 2, "--t", 2, "--samples", 100)
    rows = {r["method"]: r for r in doc["placements"]}
    assert set(rows) == {"forward", "reverse", "random"}
    assert rows["forward"]["chosen"] == ["3", "4"] and rows["forward"]["degree_sum"] == 2
    assert rows["random"]["f_eps"] <= rows["forward"]["f_eps"] * (1 + 1e-12)  # only three feasible pairs
    assert doc["eps"] == min(r["final_eps"] for r in doc["epsilon_runs"].values())


def test_node_degrees_ignore_loops_and_direction():
    net = example1()
    assert cli.node_degrees(net).tolist() == [3, 1, 1, 1]
    loop = DirectedNetwork([[-1.0, 1.0], [0.0, -1.0]], require_strong=False)
    assert cli.node_degrees(loop).tolist() == [1, 1]
