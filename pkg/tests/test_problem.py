import math
import warnings

import numpy as np
import pytest

from circuitmip.gates import GateSpec, parse_label
from circuitmip.problem import (
    ProblemError,
    close_phases,
    load_spec,
    named_target,
    pair_table,
    parse_spec,
    phase_group_contains,
    presolve,
)
from conftest import CZ_DOC, problem

CZ_GRID_DOC = """
num_qubits: 2
maximum_depth: 4
elementary_gates: [U3_1, U3_2, CNot_1_2, Identity]
angles:
  U3: {θ: [-pi/2, 0, pi/2, pi], ϕ: [-pi/2, 0, pi/2, pi], λ: [-pi/2, 0, pi/2, pi]}
target_gate: CZ
"""


class TestParse:
    def test_minimal_document(self):
        spec = parse_spec(CZ_DOC)
        assert spec.num_qubits == 2 and spec.maximum_depth == 4
        assert [g.label for g in spec.elementary_gates] == ["H_1", "H_2", "CNot_1_2", "Identity"]
        assert spec.objective == "minimize_depth" and spec.decomposition_type == "exact"
        assert spec.phase_candidates == (1, -1, 1j, -1j)
        assert np.allclose(spec.target_gate.matrix, np.diag([1, 1, 1, -1]))

    def test_json_is_accepted(self):
        doc = '{"num_qubits": 1, "maximum_depth": 2, "elementary_gates": ["H_1"], "target_gate": "X_1"}'
        assert parse_spec(doc).target_label == "X_1"

    def test_matrix_target_and_options(self):
        doc = """
num_qubits: 1
maximum_depth: 3
elementary_gates: [H_1, S_1]
target_gate:
  matrix: [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]
objective: minimize_cnot
decomposition_type: approximate
set_cnot_lower_bound: 0
phase_candidates: [1, [0, 1]]
time_limit: 5
rng_seed: 7
"""
        spec = parse_spec(doc)
        assert spec.target_gate.matrix[1, 1] == 1j
        assert spec.phase_candidates == (1, 1j)
        assert spec.rng_seed == 7 and spec.time_limit == 5.0
        assert spec.decomposition_type == "approximate"

    @pytest.mark.parametrize(
        "doc, line, key",
        [
            ("num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [H_1, Bogus_1]\ntarget_gate: CZ\n", 3, "elementary_gates"),
            ("num_qubits: 2\nmaximum_depth: 1\nelementary_gates: [H_1]\ntarget_gate: CZ\n", 2, "maximum_depth"),
            ("num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [H_3]\ntarget_gate: CZ\n", 3, "elementary_gates"),
            ("num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [H_1]\ntarget_gate: H_1\nobjective: fastest\n", 5, "objective"),
            ("num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [U3_1]\ntarget_gate: CZ\n", 3, "angles"),
        ],
    )
    def test_errors_carry_line_and_key(self, doc, line, key):
        with pytest.raises(ProblemError) as info:
            parse_spec(doc, source="p.yaml")
        assert info.value.key == key
        assert info.value.line == line
        assert str(info.value).startswith(f"p.yaml:{line}:")

    def test_missing_key(self):
        with pytest.raises(ProblemError, match="target_gate"):
            parse_spec("num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [H_1]\n")

    def test_target_checks(self):
        with pytest.raises(ProblemError, match="dimension"):
            parse_spec("num_qubits: 2\nmaximum_depth: 2\nelementary_gates: [H_1]\ntarget_gate: [[1, 0], [0, 1]]\n")
        with pytest.raises(ProblemError, match="not unitary"):
            parse_spec("num_qubits: 1\nmaximum_depth: 2\nelementary_gates: [H_1]\ntarget_gate: [[1, 1], [0, 1]]\n")

    def test_malformed_yaml_reports_line(self):
        with pytest.raises(ProblemError) as info:
            parse_spec("num_qubits: 2\nmaximum_depth: [4\n")
        assert info.value.line is not None

    def test_bad_phase_candidate(self):
        with pytest.raises(ProblemError, match="unit-modulus"):
            parse_spec(CZ_DOC + "phase_candidates: [2]\n")

    def test_load_spec(self, tmp_path):
        path = tmp_path / "cz.yaml"
        path.write_text(CZ_DOC)
        assert load_spec(path).target_label == "CZ"


class TestTargets:
    def test_toffoli_permutation(self):
        t = named_target("Toffoli", 3).matrix
        expected = np.eye(8)
        expected[[6, 7]] = expected[[7, 6]]
        assert np.array_equal(t, expected)

    def test_toffoli_other_placement(self):
        # controls 2,3 target 1: |0 1 1> <-> |1 1 1>
        t = named_target("Toffoli_2_3_1", 3).matrix
        assert t[7, 3] == 1 and t[3, 7] == 1 and t[5, 5] == 1

    def test_fredkin(self):
        t = named_target("Fredkin", 3).matrix
        # control 1 set swaps qubits 2 and 3: |1 0 1> <-> |1 1 0>
        assert t[6, 5] == 1 and t[5, 6] == 1 and t[1, 1] == 1

    def test_bare_family_and_label(self):
        assert np.allclose(named_target("CNot", 2).matrix, named_target("CNot_1_2", 2).matrix)
        assert np.allclose(named_target("Grover", 2).matrix, 0.5 * (np.ones((4, 4)) - 2 * np.eye(4)))


class TestPresolve:
    def test_identity_last_and_deduplicated(self, cz_problem):
        assert cz_problem.labels == ["H_1", "H_2", "CNot_1_2", "Identity"]
        assert cz_problem.all_real
        assert cz_problem.phase_candidates == (1, -1)

    def test_grid_counts(self):
        # 4^3 = 64 U3 per qubit; exact dedup leaves 35 non-identity matrices per qubit,
        # giving 70 + CNOT + Identity = 72; phase dedup merges 12 more per qubit
        spec = parse_spec(CZ_GRID_DOC)
        assert len(presolve(spec, dedup="exact").gates) == 72
        assert len(presolve(spec).gates) == 48

    def test_duplicate_natives_removed(self):
        p = problem("num_qubits: 1\nmaximum_depth: 2\nelementary_gates: [Z_1, Rz_1(pi), S_1, Identity]\ntarget_gate: Z_1\n")
        assert p.labels == ["Z_1", "S_1", "Identity"]
        # Rz(pi) = -i Z is dropped, so the candidates must absorb the ratio
        assert phase_group_contains(p.phase_candidates, 1j)

    def test_all_real_detection(self):
        p = problem("num_qubits: 2\nmaximum_depth: 3\nelementary_gates: [S_1, CNot_1_2]\ntarget_gate: CZ\n")
        assert not p.all_real and len(p.phase_candidates) == 4

    def test_objective_weights(self, cz_problem):
        assert list(cz_problem.objective_weights()) == [1, 1, 1, 0]
        assert list(cz_problem.objective_weights("minimize_cnot")) == [0, 0, 1, 0]

    def test_warm_start_mapped(self):
        p = problem(CZ_DOC + "input_circuit: [H_2, CNot_1_2, H_2]\n")
        assert p.warm_start == (1, 2, 1, 3)
        assert p.emphasize_optimality

    @pytest.mark.parametrize(
        "circuit, reason",
        [("[H_1, CNot_1_2, H_1]", "does not match"), ("[S_1]", "not a native"), ("[H_1, H_1, H_1, H_1, H_1]", "exceed")],
    )
    def test_warm_start_rejected_with_warning(self, circuit, reason):
        with pytest.warns(UserWarning, match=reason):
            p = problem(CZ_DOC + f"input_circuit: {circuit}\n")
        assert p.warm_start is None and not p.emphasize_optimality


class TestPhaseAlgebra:
    def test_close_phases(self):
        out = close_phases((1,), [1j])
        assert len(out) == 4 and all(abs(abs(c) - 1) < 1e-12 for c in out)

    def test_close_phases_warns_on_blowup(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            out = close_phases((1,), [complex(math.cos(1), math.sin(1))], limit=8)
        assert len(out) == 8 and caught

    def test_group_contains(self):
        assert phase_group_contains((1, -1, 1j, -1j), -1)
        assert not phase_group_contains((1, -1), 1j)

    def test_pair_table_matches_definitions(self):
        labels = ["H_1", "H_2", "S_1", "Z_1", "CNot_1_2", "Identity"]
        from circuitmip.gates import lift_to_circuit

        mats = np.stack([lift_to_circuit(parse_label(x), 2).matrix for x in labels])
        t = pair_table(mats)
        assert t.commute[0, 1] and not t.commute[0, 4] and t.commute[3, 4]
        assert t.redundant[2, 2] == 3 and t.redundant_phase[2, 2] == pytest.approx(1)
        assert t.involutory[0] and t.involutory[4] and not t.involutory[2]
        assert t.idempotent[5] and not t.idempotent[0]
        assert t.redundant[0, 0] == 5  # H H = I


def test_gate_spec_validation():
    with pytest.raises(ValueError):
        GateSpec("CNot", (1,))
