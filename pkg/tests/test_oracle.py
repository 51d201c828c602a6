import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circuitmip.gates import circuit_unitary, lift_to_circuit, parse_label
from circuitmip.oracle import OracleBudgetError, enumerate_exhaustive, enumerate_random
from circuitmip.problem import parse_spec, presolve
from conftest import problem

CNOT21_DOC = "num_qubits: 2\nmaximum_depth: 4\nelementary_gates: [CNot_1_2, Identity]\ntarget_gate: CNot_2_1\n"


def brute_force(p, objective=None):
    """Plain itertools scan over every full-depth sequence, Identity included."""
    weights = p.objective_weights(objective)
    best = None
    for seq in itertools.product(range(len(p.gates)), repeat=p.maximum_depth):
        prod = np.eye(2**p.num_qubits, dtype=complex)
        for g in seq:
            prod = prod @ p.matrices[g]
        if any(np.abs(prod - c * p.target.matrix).max() <= 1e-4 for c in p.phase_candidates):
            cost = float(weights[list(seq)].sum())
            best = cost if best is None else min(best, cost)
    return best


class TestExhaustive:
    def test_cz(self, cz_problem):
        res = enumerate_exhaustive(cz_problem)
        assert res.status == "optimal" and res.objective == 3
        assert res.labels == ["H_2", "CNot_1_2", "H_2"] and res.phase == 1 and res.depth == 3

    def test_cz_min_cnot(self, cz_problem):
        res = enumerate_exhaustive(cz_problem, objective="minimize_cnot")
        assert res.objective == 1 and res.labels.count("CNot_1_2") == 1

    def test_cnot21_infeasible_counts_every_sequence(self):
        res = enumerate_exhaustive(problem(CNOT21_DOC))
        # [Identity] plus one identity-free sequence per length 1..4
        assert res.status == "infeasible" and res.checked == 5 and res.objective is None

    def test_identity_target(self):
        p = problem("num_qubits: 2\nmaximum_depth: 3\nelementary_gates: [H_1, CNot_1_2, Identity]\ntarget_gate: Identity\n")
        res = enumerate_exhaustive(p)
        assert res.objective == 0 and res.labels == ["Identity"]

    def test_depth_cap(self, cz_problem):
        assert enumerate_exhaustive(cz_problem, max_depth=2).status == "infeasible"

    def test_guard_limit(self, cz_problem):
        with pytest.raises(OracleBudgetError) as info:
            enumerate_exhaustive(cz_problem, guard_limit=100)
        assert info.value.required == 4**4

    def test_workers_give_same_answer(self, cz_problem):
        a = enumerate_exhaustive(cz_problem)
        b = enumerate_exhaustive(cz_problem, workers=2)
        assert (a.objective, a.sequence, a.checked) == (b.objective, b.sequence, b.checked)


POOL = ["H_1", "H_2", "S_1", "T_2", "X_1", "CNot_1_2", "CNot_2_1", "CZ_1_2"]


@settings(max_examples=25)
@given(
    st.lists(st.sampled_from(POOL), min_size=1, max_size=4, unique=True),
    st.lists(st.sampled_from(POOL), min_size=1, max_size=3),
    st.sampled_from(["minimize_depth", "minimize_cnot"]),
)
def test_matches_independent_brute_force(natives, target_seq, objective):
    if objective == "minimize_cnot" and not any(n.startswith("C") for n in natives):
        objective = "minimize_depth"
    target = circuit_unitary([lift_to_circuit(parse_label(x), 2) for x in target_seq], 2)
    doc = {
        "num_qubits": 2,
        "maximum_depth": 3,
        "elementary_gates": natives + ["Identity"],
        "target_gate": [[[float(v.real), float(v.imag)] for v in row] for row in target],
        "objective": objective,
    }
    p = presolve(parse_spec(doc))
    res = enumerate_exhaustive(p)
    truth = brute_force(p)
    assert (res.status == "infeasible") == (truth is None)
    if truth is not None:
        assert res.objective == pytest.approx(truth)


class TestRandom:
    def test_finds_cz_and_is_seeded(self, cz_problem):
        a = enumerate_random(cz_problem, 10, seed=3, max_samples=20000)
        b = enumerate_random(cz_problem, 10, seed=3, max_samples=20000)
        assert a.found and a.objective == 3 and a.samples == 20000
        assert a.sequence == b.sequence and a.trace == b.trace

    def test_infeasible_keeps_closest_draw(self):
        res = enumerate_random(problem(CNOT21_DOC), 10, max_samples=500)
        assert not res.found and res.best_residual > 0.5 and len(res.best_residual_sequence) == 4

    def test_rejects_nonpositive_limit(self, cz_problem):
        with pytest.raises(ValueError):
            enumerate_random(cz_problem, 0)

    def test_never_beats_exhaustive(self, cz_problem):
        res = enumerate_random(cz_problem, 10, seed=0, max_samples=5000)
        assert res.objective >= enumerate_exhaustive(cz_problem).objective
