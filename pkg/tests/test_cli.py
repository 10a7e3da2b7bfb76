import csv
import io
import json

import pytest

from irsa_mpr import cli
from irsa_mpr.degree import LAMBDA2, save_distribution
from irsa_mpr.errors import BracketError


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = cli.main(list(argv))
        out, err = capsys.readouterr()
        return code, out, err
    return _run


@pytest.fixture
def lambda2_file(tmp_path):
    path = tmp_path / "lambda2.json"
    save_distribution(LAMBDA2, path)
    return str(path)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestDesign:
    def test_default_setting(self, run):
        code, out, _ = run("design", "--k", "2", "--eps", "0.01", "--l", "5")
        assert code == 0
        doc = json.loads(out)
        assert doc["a_star"] == 1.73
        assert doc["load_bound"] == pytest.approx(1.6757, abs=1e-4)
        assert doc["threshold"] == pytest.approx(1.684, abs=1e-3)
        assert len(doc["distribution"]["entries"]) == 5

    def test_regular_case(self, run):
        code, out, _ = run("design", "--k", "2", "--eps", "0.1", "--l", "1")
        assert code == 0
        assert json.loads(out)["distribution"] == {"entries": [{"degree": 2, "prob": 1.0}]}

    def test_general_k(self, run):
        code, out, _ = run("design", "--k", "3", "--eps", "0.01", "--l", "5")
        doc = json.loads(out)
        assert code == 0 and doc["K"] == 3 and doc["a_star"] > 1.73
        assert doc["threshold"] >= doc["load_bound"]

    @pytest.mark.parametrize("argv", [["--k", "0"], ["--l", "-1"], ["--eps", "abc"]])
    def test_invalid(self, run, argv):
        assert run("design", *argv)[0] == 2


class TestThreshold:
    def test_exponential_design(self, run):
        code, out, _ = run("threshold", "--l", "5", "--k", "2")
        doc = json.loads(out)
        assert code == 0
        assert doc["G_star"] == pytest.approx(1.676, abs=0.01)
        assert doc["certificate"]["certified"]
        assert doc["certificate"]["min_residual"] > 0
        assert doc["diagnostics"]["bisection_steps"] > 0

    def test_regular_k1_and_k2(self, run, tmp_path):
        path = tmp_path / "reg.json"
        path.write_text(json.dumps({"entries": [{"degree": 2, "prob": 1.0}]}))
        g1 = json.loads(run("threshold", "--dist", str(path), "--k", "1")[1])["G_star"]
        g2 = json.loads(run("threshold", "--dist", str(path), "--k", "2")[1])["G_star"]
        assert g1 == pytest.approx(0.5, abs=2e-3)
        assert g2 > 0.5

    def test_missing_file(self, run, tmp_path):
        assert run("threshold", "--dist", str(tmp_path / "nope.json"))[0] == 3

    def test_garbled_file(self, run, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert run("threshold", "--dist", str(path))[0] == 3

    def test_invalid_distribution(self, run, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"entries": [{"degree": 2, "prob": 0.4}]}))
        assert run("threshold", "--dist", str(path))[0] == 2
        path.write_text(json.dumps({"entries": [{"degree": 1, "prob": 1.0}]}))
        assert run("threshold", "--dist", str(path))[0] == 2

    def test_numerical_failure_exit_code(self, run, monkeypatch):
        def boom(*a, **k):
            raise BracketError("synthetic")
        monkeypatch.setattr(cli, "threshold_bisection", boom)
        assert run("threshold", "--l", "3")[0] == 4


class TestSimulation:
    def test_plr_curve_csv(self, run, lambda2_file):
        code, out, _ = run("plr-curve", "--dist", lambda2_file, "--loads", "1.6,1.0",
                           "--users", "200", "--trials", "5", "--seed", "3")
        assert code == 0
        table = rows(out)
        assert list(table[0]) == cli.SIM_COLUMNS
        assert [float(r["G"]) for r in table] == [1.0, 1.6]
        assert table[0]["trials"] == "5" and table[0]["M"] == "200" and table[0]["seed"] == "3"
        for r in table:
            assert float(r["ci_low"]) <= float(r["plr"]) <= float(r["ci_high"])

    def test_nine_significant_digits(self, run):
        out = run("plr-curve", "--loads", "1.7", "--users", "300", "--trials", "3")[1]
        realized = rows(out)[0]["realized_G"]
        assert realized == f"{300 / round(300 / 1.7):.9g}"

    def test_empty_loads(self, run):
        assert run("plr-curve", "--loads", "")[0] == 2
        assert run("plr-curve", "--loads", "1.0,-1")[0] == 2

    def test_unreadable_distribution(self, run, tmp_path):
        assert run("plr-curve", "--dist", str(tmp_path / "x.json"), "--loads", "1")[0] == 3

    def test_simulate_single_row(self, run):
        code, out, _ = run("simulate", "--load", "1.2", "--users", "100", "--trials", "2")
        assert code == 0 and len(rows(out)) == 1

    def test_frame_too_small(self, run):
        assert run("simulate", "--load", "2", "--users", "4", "--trials", "1")[0] == 2


class TestEnergy:
    @pytest.mark.parametrize("ptx,best", [("50", "2"), ("35", "3"), ("20", "4")])
    def test_optimum_marked(self, run, ptx, best):
        code, out, _ = run("energy", "--ptx", ptx)
        table = rows(out)
        assert code == 0 and list(table[0]) == cli.ENERGY_COLUMNS
        assert [r["L"] for r in table if r["is_optimal"] == "true"] == [best]

    def test_invalid_model(self, run):
        assert run("energy", "--ptx", "0")[0] == 2
        assert run("energy", "--noise", "-1")[0] == 2

    def test_table1(self, run):
        code, out, _ = run("table1")
        table = rows(out)
        assert code == 0 and len(table) == 7
        assert float(table[0]["ratio"]) == pytest.approx(0.865)
        assert float(table[0]["published"]) == 0.8649


class TestManifest:
    def test_manifest_equals_flags(self, run, tmp_path):
        manifest = tmp_path / "m.json"
        out_m = tmp_path / "a.csv"
        out_f = tmp_path / "b.csv"
        manifest.write_text(json.dumps({
            "command": "plr-curve",
            "parameters": {"loads": [1.2, 1.5], "users": 200, "trials": 4, "k": 2},
            "output_path": str(out_m),
            "seed": 17,
        }))
        assert run("--manifest", str(manifest))[0] == 0
        assert run("plr-curve", "--loads", "1.2,1.5", "--users", "200", "--trials", "4",
                   "--seed", "17", "--out", str(out_f))[0] == 0
        assert out_m.read_bytes() == out_f.read_bytes()

    def test_unknown_parameter(self, run, tmp_path):
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({"command": "table1", "parameters": {"bogus": 1}}))
        assert run("--manifest", str(manifest))[0] == 2

    def test_unknown_command(self, run, tmp_path):
        manifest = tmp_path / "m.json"
        manifest.write_text(json.dumps({"command": "plot"}))
        assert run("--manifest", str(manifest))[0] == 2

    def test_missing_manifest(self, run, tmp_path):
        assert run("--manifest", str(tmp_path / "none.json"))[0] == 3


def test_no_command(run):
    assert run()[0] == 2


def test_unwritable_output(run, tmp_path):
    assert run("table1", "--out", str(tmp_path / "missing" / "t.csv"))[0] == 3
