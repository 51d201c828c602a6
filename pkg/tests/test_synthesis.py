import math

import pytest

from circuitmip.synthesis import SolveOptions, decompose
from conftest import CZ_DOC, problem

CNOT21_DOC = "num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [CNot_1_2, Identity]\ntarget_gate: CNot_2_1\n"


def test_cz_end_to_end(cz_problem):
    d = decompose(cz_problem)
    assert d.status == "optimal" and d.objective == 3 and d.gap == 0
    assert d.labels == ["H_2", "CNot_1_2", "H_2"] and d.residual < 1e-9
    assert [ph["status"] for ph in d.details["phases"]] == ["optimal", "infeasible"]


def test_minimum_over_phases():
    # X_1 from {Rx_1(pi), H_1, S_1}: Rx(pi) = -iX reaches it in one gate only at phase -i
    p = problem("num_qubits: 1\nmaximum_depth: 3\nelementary_gates: [H_1, S_1, Rx_1(pi)]\ntarget_gate: X_1\n")
    d = decompose(p)
    assert d.objective == 1 and d.labels == ["Rx_1(pi)"]
    assert d.phase == -1j


def test_later_phase_must_be_strictly_better(cz_problem):
    d = decompose(cz_problem.with_options(phase_candidates=(-1, 1)))
    assert d.objective == 3 and d.phase == 1


def test_workers_agree(cz_problem):
    a = decompose(cz_problem)
    b = decompose(cz_problem, SolveOptions(workers=2))
    assert (a.objective, a.labels, a.phase) == (b.objective, b.labels, b.phase)


def test_objective_override(cz_problem):
    assert decompose(cz_problem, SolveOptions(objective="minimize_cnot")).objective == 1


def test_infeasible():
    d = decompose(problem(CNOT21_DOC))
    assert d.status == "infeasible" and d.circuit == [] and math.isinf(d.lower_bound)


def test_time_limit_without_incumbent(cz_problem):
    d = decompose(cz_problem, SolveOptions(time_limit=1e-9))
    assert d.status == "time_limit" and d.lower_bound == -math.inf


def test_warm_start_from_input_circuit():
    d = decompose(problem(CZ_DOC + "input_circuit: [H_2, CNot_1_2, H_2]\n"))
    assert d.status == "optimal" and d.objective == 3


def test_approximate_falls_back_to_random_search():
    p = problem(CNOT21_DOC + "decomposition_type: approximate\nrng_seed: 4\n")
    d = decompose(p, SolveOptions(random_fallback_limit=0.5))
    assert d.status == "approximate" and d.source == "random_search"
    assert d.residual == pytest.approx(1.0) and d.details["exact_status"] == "infeasible"
