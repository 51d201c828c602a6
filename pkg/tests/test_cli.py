import json
import subprocess
import sys

import pytest

from circuitmip.cli import main, parse_phase
from circuitmip.mps import read_mps
from conftest import CZ_DOC

CNOT21_DOC = "num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [CNot_1_2, Identity]\ntarget_gate: CNot_2_1\n"


@pytest.fixture
def cz_file(tmp_path):
    path = tmp_path / "cz.yaml"
    path.write_text(CZ_DOC)
    return path


@pytest.mark.parametrize("text, value", [("1", 1), ("-1", -1), ("i", 1j), ("-i", -1j), ("0.6+0.8i", 0.6 + 0.8j)])
def test_parse_phase(text, value):
    assert parse_phase(text) == value


class TestSolve:
    def test_optimal_cz(self, cz_file, capsys):
        assert main(["solve", str(cz_file)]) == 0
        doc = json.loads(cz_file.with_name("cz.result.json").read_text())
        assert doc["status"] == "optimal" and doc["objective"] == 3 and doc["cnot_count"] == 1
        assert doc["input"] == "cz.yaml" and doc["flags"]["valid_constraints"] is True
        out = capsys.readouterr().out
        assert "status: optimal" in out and "[X]" in out

    def test_infeasible_exit_code(self, tmp_path):
        path = tmp_path / "c21.yaml"
        path.write_text(CNOT21_DOC)
        assert main(["solve", str(path), "-q", "--no-valid-constraints"]) == 2
        doc = json.loads((tmp_path / "c21.result.json").read_text())
        assert doc["status"] == "infeasible" and "circuit" not in doc

    def test_time_limit_exit_code(self, cz_file, tmp_path):
        out = tmp_path / "r.json"
        assert main(["solve", str(cz_file), "-q", "--time-limit", "1e-9", "-o", str(out)]) == 3
        assert json.loads(out.read_text())["status"] == "time_limit"

    def test_objective_and_phase_flags(self, cz_file, tmp_path):
        out = tmp_path / "r.json"
        assert main(["solve", str(cz_file), "-q", "--objective", "minimize_cnot", "--phase-set", "1", "-o", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["objective"] == 1 and len(doc["details"]["phases"]) == 1

    def test_bad_problem_is_error(self, tmp_path, capsys):
        path = tmp_path / "bad.yaml"
        path.write_text("num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [Bogus_1]\ntarget_gate: CZ\n")
        assert main(["solve", str(path)]) == 1
        assert "bad.yaml:3:" in capsys.readouterr().err

    def test_missing_file_is_error(self, tmp_path):
        assert main(["solve", str(tmp_path / "nope.yaml")]) == 1


class TestEnumerate:
    def test_exhaustive(self, cz_file):
        assert main(["enumerate", str(cz_file), "-q"]) == 0
        doc = json.loads(cz_file.with_name("cz.exhaustive.json").read_text())
        assert doc["source"] == "exhaustive" and doc["circuit"] == ["H_2", "CNot_1_2", "H_2"]
        assert doc["residual"] < 1e-12

    def test_random(self, cz_file):
        code = main(["enumerate", str(cz_file), "-q", "--mode", "random", "--max-samples", "5000", "--seed", "1"])
        assert code == 0
        doc = json.loads(cz_file.with_name("cz.random.json").read_text())
        assert doc["source"] == "random_search" and doc["details"]["samples"] == 5000


class TestExport:
    def test_one_file_per_phase(self, cz_file, tmp_path):
        outdir = tmp_path / "mps"
        assert main(["export", str(cz_file), "-o", str(outdir)]) == 0
        files = sorted(p.name for p in outdir.iterdir())
        assert files == ["cz_phase0.mps", "cz_phase1.mps"]
        data = read_mps((outdir / "cz_phase0.mps").read_text())
        assert data.name == "cz_phase0" and data.integer.sum() == 16

    def test_single_phase(self, cz_file, tmp_path):
        assert main(["export", str(cz_file), "--phase", "-1", "-o", str(tmp_path / "x")]) == 0
        assert [p.name for p in (tmp_path / "x").iterdir()] == ["cz_phase0.mps"]


class TestVerify:
    def test_list_file(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("[H_2, CNot_1_2, H_2]\n")
        assert main(["verify", str(path), "--target", "CZ", "--num-qubits", "2"]) == 0
        path.write_text("[H_1, CNot_1_2, H_1]\n")
        assert main(["verify", str(path), "--target", "CZ", "--num-qubits", "2"]) == 4

    def test_result_document(self, cz_file):
        main(["solve", str(cz_file), "-q"])
        assert main(["verify", str(cz_file.with_name("cz.result.json"))]) == 0

    def test_needs_target(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("[H_1]\n")
        assert main(["verify", str(path)]) == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "circuitmip", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "solve" in proc.stdout
