import json
import subprocess
import sys

import numpy as np
import pytest

from povm_labeler import computational_basis, qubit_binary, trine, uniform_observable
from povm_labeler.cli import main
from povm_labeler.observables import observable_to_json


def write(path, obs):
    path.write_text(json.dumps(observable_to_json(obs)))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "trine": write(tmp_path / "trine.json", trine()),
        "qutrit": write(tmp_path / "qutrit.json", computational_basis(3)),
        "binary": write(tmp_path / "binary.json", qubit_binary(0.8, 0.2)),
        "uniform": write(tmp_path / "uniform.json", uniform_observable(3)),
    }


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestValidate:
    def test_ok(self, capsys, files):
        assert run(capsys, "validate", files["trine"])[0] == 0

    def test_defect(self, capsys, tmp_path):
        obj = observable_to_json(computational_basis(2))
        obj["effects"][1]["entries"][1][1] = [0.95, 0.0]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(obj))
        code, _, err = run(capsys, "validate", path, "--format", "json")
        assert code == 2
        diag = json.loads(err)
        assert diag["invariant"] == "completeness"
        assert diag["defect"] == pytest.approx(0.05)

    def test_malformed(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert run(capsys, "validate", path)[0] == 1

    def test_missing(self, capsys, tmp_path):
        assert run(capsys, "validate", tmp_path / "nope.json")[0] == 1


class TestAnalyze:
    def test_trine(self, capsys, files):
        code, out, _ = run(capsys, "analyze", files["trine"], "--format", "json")
        assert code == 0
        report = json.loads(out)
        s = report["single_shot"]
        assert s["success_probability"]["value"] == pytest.approx(1 / 3, abs=1e-12)
        assert s["unambiguous_possible"]["value"] is False
        assert report["multi_shot"]["perfect_plan"]["feasible"]["value"] is False
        assert len(report["anti"]["exclusions"]) == 3

    def test_qutrit(self, capsys, files):
        report = json.loads(run(capsys, "analyze", files["qutrit"], "--format", "json")[1])
        plan = report["multi_shot"]["perfect_plan"]
        assert plan["feasible"]["value"] and plan["shots_required"]["value"] == 2

    def test_binary_curve(self, capsys, files):
        report = json.loads(run(capsys, "analyze", files["binary"], "--shots-max", 5, "--format", "json")[1])
        errors = report["multi_shot"]["error_curve"]["errors"]["value"]
        np.testing.assert_allclose(errors[:3], [0.2, 0.2, 0.248], atol=1e-12)
        assert len(errors) == 5

    def test_sources_everywhere(self, capsys, files):
        report = json.loads(run(capsys, "analyze", files["trine"], "--format", "json")[1])

        def walk(node):
            if isinstance(node, dict):
                if "value" in node:
                    assert isinstance(node.get("source"), str) and node["source"]
                for v in node.values():
                    walk(v)
            elif isinstance(node, list):
                for v in node:
                    walk(v)

        walk(report)

    def test_idempotent(self, capsys, files):
        first = run(capsys, "analyze", files["trine"], "--format", "json")[1]
        second = run(capsys, "analyze", files["trine"], "--format", "json")[1]
        assert first == second

    def test_text(self, capsys, files):
        code, out, _ = run(capsys, "analyze", files["binary"])
        assert code == 0 and "error curve" in out

    def test_shots_range(self, capsys, files):
        assert run(capsys, "analyze", files["binary"], "--shots-max", 0)[0] == 2


class TestSimulate:
    def test_trine(self, capsys, files):
        code, out, _ = run(
            capsys, "simulate", files["trine"], "--trials", 100_000, "--seed", 42, "--format", "json"
        )
        assert code == 0
        obj = json.loads(out)
        assert abs(obj["estimate"] - 1 / 3) <= 3 * obj["standard_error"]

    def test_perfect_plan(self, capsys, files):
        out = run(capsys, "simulate", files["qutrit"], "--strategy", "perfect-plan", "--format", "json")[1]
        assert json.loads(out)["estimate"] == 1.0

    def test_sequential_on_binary(self, capsys, files):
        assert run(capsys, "simulate", files["binary"], "--strategy", "sequential-3")[0] == 2

    def test_unknown_strategy(self, capsys, files):
        assert run(capsys, "simulate", files["trine"], "--strategy", "bogus")[0] == 2

    def test_custom(self, capsys, files, tmp_path):
        probes = tmp_path / "probes.json"
        probes.write_text(json.dumps({"probes": [[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]]]}))
        out = run(capsys, "simulate", files["qutrit"], "--strategy", f"custom:{probes}", "--format", "json")[1]
        assert json.loads(out)["estimate"] == 1.0

    def test_merge_flag(self, capsys, files):
        out = run(capsys, "simulate", files["uniform"], "--merge-equal-effects", "--format", "json")[1]
        assert json.loads(out)["estimate"] == 1.0

    def test_byte_identical(self, tmp_path, files):
        outputs = []
        for k in range(2):
            target = tmp_path / f"run{k}.json"
            main(["simulate", files["trine"], "--seed", "42", "--format", "json", "-o", str(target)])
            outputs.append(target.read_bytes())
        assert outputs[0] == outputs[1]


class TestOracle:
    def test_tester(self, capsys, files):
        code, out, _ = run(capsys, "oracle", files["trine"], "--check", "tester", "--samples", 5000, "--format", "json")
        assert code == 0
        assert json.loads(out)["reports"][0]["oracle_value"] <= 1 / 3 + 1e-9

    def test_kron(self, capsys, files):
        code, out, _ = run(capsys, "oracle", files["binary"], "--check", "kron", "--format", "json")
        assert code == 0
        assert all(abs(r["gap"]) <= 1e-10 for r in json.loads(out)["reports"])

    def test_unambiguous(self, capsys, files):
        code, out, _ = run(capsys, "oracle", files["trine"], "--check", "unambiguous", "--format", "json")
        assert code == 0 and json.loads(out)["reports"][0]["feasible"] is False

    @pytest.mark.parametrize("check", ["alpha", "simple"])
    def test_other_checks(self, capsys, files, check):
        assert run(capsys, "oracle", files["qutrit"], "--check", check)[0] == 0

    def test_contradiction_exit(self, capsys, files, monkeypatch):
        from povm_labeler import oracle

        fake = oracle.OracleReport("tester", 1 / 3, 0.5, samples=1, seed=0)
        monkeypatch.setattr(oracle, "random_tester_bound", lambda *a, **k: fake)
        assert run(capsys, "oracle", files["trine"], "--check", "tester")[0] == 3

    def test_scope_error(self, capsys, files):
        assert run(capsys, "oracle", files["binary"], "--check", "unambiguous")[0] == 2


class TestConstruct:
    def test_basis(self, capsys):
        code, out, _ = run(capsys, "construct", "--n", 3, "--d", 3)
        assert code == 0
        obj = json.loads(out)
        assert obj["dim"] == 3 and len(obj["effects"]) == 3

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "c.json"
        assert run(capsys, "construct", "--n", 2, "--d", 4, "-o", target)[0] == 0
        obj = json.loads(target.read_text())
        assert obj["effects"][0]["entries"][0][0] == [1.0, 0.0]
        assert run(capsys, "validate", target)[0] == 0

    def test_n_greater_than_d(self, capsys):
        assert run(capsys, "construct", "--n", 4, "--d", 3)[0] == 2

    def test_residuals(self, capsys, tmp_path):
        from povm_labeler.linalg import matrix_to_json

        res = [np.zeros((4, 4)), np.zeros((4, 4)), np.diag([0, 0, 1.0, 1.0])]
        path = tmp_path / "res.json"
        path.write_text(json.dumps({"residuals": [matrix_to_json(m) for m in res]}))
        assert run(capsys, "construct", "--n", 3, "--d", 4, "--residuals", path)[0] == 0


def test_module_entry(files):
    proc = subprocess.run(
        [sys.executable, "-m", "povm_labeler", "validate", files["trine"]], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "valid" in proc.stdout
