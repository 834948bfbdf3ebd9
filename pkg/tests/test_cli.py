import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from innerfn.cli import main
from innerfn.zeros import ZeroList, atomic_count_below, atomic_frostman_zeros, dyadic_counts, read_zeros_csv

GOLDEN = Path(__file__).parent / "golden"


def run_cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "innerfn", *args], capture_output=True,
                          text=True, cwd=cwd)


def assert_close_tree(a, b, rel=1e-9):
    if isinstance(a, dict):
        assert sorted(a) == sorted(b)
        for k in a:
            assert_close_tree(a[k], b[k], rel)
    elif isinstance(a, list):
        assert len(a) == len(b)
        for x, y in zip(a, b):
            assert_close_tree(x, y, rel)
    elif isinstance(a, float) and isinstance(b, float):
        assert b == pytest.approx(a, rel=rel, abs=1e-300)
    else:
        assert a == b


class TestZerosCommand:
    def test_atomic_csv(self, tmp_path):
        out = tmp_path / "zeros.csv"
        assert main(["zeros", "atomic-frostman", "--a", "0.367879441", "--n", "100",
                     "--out", str(out)]) == 0
        rows = list(csv.reader(out.open()))
        assert rows[0] == ["re", "im"] and len(rows) - 1 == 201
        first = complex(float(rows[1][0]), float(rows[1][1]))
        assert abs(first) < 1e-9

    def test_round_trip_profile(self, tmp_path):
        out = tmp_path / "z.csv"
        main(["zeros", "atomic-frostman", "--a", "0.3+0.2j", "--n", "300", "--out", str(out)])
        zl = atomic_frostman_zeros(0.3 + 0.2j, 300)
        back = ZeroList.from_array(read_zeros_csv(out), zl.complete_below)
        assert dyadic_counts(back, 10, 0.3 + 0.2j) == dyadic_counts(zl, 10)

    def test_numeric_needs_function(self, capsys):
        assert main(["zeros", "numeric", "--a", "0.3"]) == 1
        assert "--function" in capsys.readouterr().err

    def test_json_output(self, tmp_path):
        out = tmp_path / "z.json"
        assert main(["zeros", "numeric", "--function", "atomic", "--a", "-0.5",
                     "--r-max", "0.99", "--out", str(out)]) == 0
        assert len(json.loads(out.read_text())["zeros"]) == atomic_count_below(-0.5, 0.99)


class TestSimpleCommands:
    def test_eval(self, capsys):
        assert main(["eval", "--z", "0", "0.5j"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["results"][0]["value"][0] == pytest.approx(math.exp(-1), rel=1e-15)

    def test_eval_frostman_derivative(self, capsys):
        assert main(["eval", "--z", "0.1", "--a", "0.4", "--derivative"]) == 0
        d = json.loads(capsys.readouterr().out)
        assert d["derivative"] is True and d["results"][0]["error_bound"] <= 1e-10

    def test_norm(self, tmp_path):
        out, csv_path = tmp_path / "n.json", tmp_path / "n.csv"
        code = main(["norm", "--p", "1", "--q", "1", "--m", "10", "--out", str(out), "--csv", str(csv_path)])
        assert code == 0
        d = json.loads(out.read_text())
        assert d["verdict"]["verdict"] == "convergent"
        assert csv_path.read_text().splitlines()[0] == "m,value"

    def test_dyadic_sum(self, capsys):
        assert main(["dyadic-sum", "--p", "1", "--max-n", "16"]) == 0
        assert json.loads(capsys.readouterr().out)["verdict"]["verdict"] == "convergent"

    def test_weight_check(self, capsys):
        assert main(["weight-check", "--weight", "power:1", "--p-list", "3"]) == 0
        d = json.loads(capsys.readouterr().out)["report"]
        assert d["in_Dhat"] is True and abs(d["beta_hat"] - 2) < 0.05

    def test_bad_function(self, capsys):
        assert main(["eval", "--function", "nope", "--z", "0"]) == 1
        assert "function" in capsys.readouterr().err

    def test_usage_error_exit_code(self):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "no-such-suite"])
        assert exc.value.code == 1


class TestConfigs:
    def test_missing_p(self, tmp_path, capsys):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps({"suite": "theorem3", "function": "atomic", "parameters": {}}))
        assert main(["run", str(cfg)]) == 1
        assert "parameters.p" in capsys.readouterr().err

    @pytest.mark.parametrize("raw,path", [
        ({"suite": "nope", "function": "atomic", "parameters": {}}, "suite"),
        ({"suite": "theorem1", "function": "atomic", "parameters": {"p": 1, "q": 1, "m": 40}}, "parameters.m"),
        ({"suite": "theorem3", "function": "atomic", "parameters": {"p": 1, "a": 2}}, "parameters.a"),
        ({"suite": "theorem3", "function": {"kind": "blaschke", "zeros": [1.5]},
          "parameters": {"p": 1}}, "function.zeros"),
        ({"suite": "theorem3", "function": "atomic", "weight": "power:-2", "parameters": {"p": 1}}, "weight"),
    ])
    def test_schema_paths(self, tmp_path, capsys, raw, path):
        cfg = tmp_path / "bad.json"
        cfg.write_text(json.dumps(raw))
        assert main(["run", str(cfg)]) == 1
        assert f"config error at {path}" in capsys.readouterr().err

    def test_unreadable(self, tmp_path):
        assert main(["run", str(tmp_path / "missing.json")]) == 1
        bad = tmp_path / "x.json"
        bad.write_text("{not json")
        assert main(["run", str(bad)]) == 1

    def test_run_writes_outputs(self, tmp_path):
        cfg = tmp_path / "ok.json"
        cfg.write_text(json.dumps({
            "suite": "theorem3", "function": {"kind": "blaschke", "zeros": [0.5]},
            "parameters": {"p": 0.75, "a": 0.3, "m": 10},
            "outputs": {"json": str(tmp_path / "r.json"), "csv": str(tmp_path / "r.csv")}}))
        assert main(["run", str(cfg)]) == 0
        rep = json.loads((tmp_path / "r.json").read_text())
        assert rep["schema_version"] == 1 and rep["result"]["status"] == "pass"
        assert rep["config"]["parameters"]["C"] == 0.5  # defaults echoed
        assert (tmp_path / "r.csv").read_text().startswith("series,k,block")


class TestVerifyCommand:
    def test_theorem3_atomic(self, tmp_path):
        proc = run_cli("verify", "theorem3", "--function", "atomic", "--p", "0.75", "--alpha", "0",
                       "--out", str(tmp_path / "t3.json"))
        assert proc.returncode == 0, proc.stderr
        rep = json.loads((tmp_path / "t3.json").read_text())
        assert {v["verdict"] for v in rep["result"]["verdicts"].values()} == {"convergent"}

    def test_inline_function(self, tmp_path):
        assert main(["verify", "theorem1", "--function", '{"kind": "blaschke", "zeros": [0.5, [0, 0.9]]}',
                     "--p", "1", "--q", "1", "--m", "8", "--a", "0.3"]) == 0

    def test_byte_identical_reruns(self, tmp_path):
        outs = []
        for i in range(2):
            out = tmp_path / f"r{i}.json"
            proc = run_cli("verify", "theorem1", "--function", "atomic", "--p", "1", "--q", "1",
                           "--m", "10", "--seed", "3", "--out", str(out))
            assert proc.returncode == 0, proc.stderr
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_golden(self, tmp_path):
        out = tmp_path / "g.json"
        assert main(["verify", "theorem1", "--function", "atomic", "--p", "1", "--q", "1",
                     "--m", "10", "--out", str(out)]) == 0
        golden = json.loads((GOLDEN / "theorem1_atomic_p1_q1_m10.json").read_text())
        assert_close_tree(golden, json.loads(out.read_text()))
