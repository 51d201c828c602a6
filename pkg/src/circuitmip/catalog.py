"""Desk-scale two-qubit benchmark instances shared by tests and scripts.

Each entry is a problem document in the same format the CLI reads. The gate
sets follow the usual hardware-flavoured natives (H/S/T, U3 grids, one CNOT
orientation) but are kept small enough that exhaustive enumeration and the
embedded branch-and-bound both finish in seconds.
"""

from __future__ import annotations

import yaml

from .problem import ProblemSpec, parse_spec

_DOCS = {
    "cz_h_cnot12": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [H_1, H_2, CNot_1_2, Identity]
target_gate: CZ
""",
    "cz_h_cnot21": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [H_1, H_2, CNot_2_1, Identity]
target_gate: CZ
""",
    "cz_min_cnot": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [H_1, H_2, CNot_1_2, Identity]
target_gate: CZ
objective: minimize_cnot
""",
    "cnot21_infeasible": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [CNot_1_2, Identity]
target_gate: CNot_2_1
""",
    "cnot21_h_cz": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [H_1, H_2, CZ_1_2, Identity]
target_gate: CNot_2_1
""",
    "cnot21_hh_cnot12": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [H_1⊗H_2, H_1, CNot_1_2, Identity]
target_gate: CNot_2_1
""",
    "swap_cnots": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [CNot_1_2, CNot_2_1, Identity]
target_gate: Swap
""",
    "swap_one_cnot_infeasible": """
num_qubits: 2
maximum_depth: 3
elementary_gates: [CNot_1_2, H_1, Identity]
target_gate: Swap
""",
    "iswap_s_h_cnots": """
num_qubits: 2
maximum_depth: 5
elementary_gates: [S_1⊗S_2, H_1, H_2, CNot_1_2, CNot_2_1, Identity]
target_gate: iSwap
""",
    "magic_s_h_cnot21": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [S_1, S_2, H_2, CNot_2_1, Identity]
target_gate: Magic
""",
    "grover_u3_pair": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [U3_1(pi/2,pi,0), U3_1(pi/2,0,0), H_1, H_2, CNot_1_2, Identity]
target_gate: GroverDiffusion
""",
    "ch_ry_cnot": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [Ry_2, CNot_1_2, Identity]
angles: {Ry: {theta: [-pi/4, pi/4]}}
target_gate: CH
""",
    "cv_cvdg_h_cz": """
num_qubits: 2
maximum_depth: 4
elementary_gates: [CVdagger_1_2, H_2, CZ_1_2, Identity]
target_gate: CV
""",
    "identity_target": """
num_qubits: 2
maximum_depth: 3
elementary_gates: [H_1, CNot_1_2, Identity]
target_gate: Identity
""",
}

# optimal objective per instance (None = infeasible); frozen from exhaustive
# enumeration and checked by hand against the known textbook identities
EXPECTED = {
    "cz_h_cnot12": 3,  # H_2 CNot_1_2 H_2
    "cz_h_cnot21": 3,  # H_1 CNot_2_1 H_1
    "cz_min_cnot": 1,
    "cnot21_infeasible": None,  # products of CNot_1_2 are I or CNot_1_2
    "cnot21_h_cz": 3,  # H_1 CZ H_1
    "cnot21_hh_cnot12": 3,  # (H x H) CNot_1_2 (H x H)
    "swap_cnots": 3,
    "swap_one_cnot_infeasible": None,  # Swap needs three CNOTs
    "iswap_s_h_cnots": 5,
    "magic_s_h_cnot21": 4,
    "grover_u3_pair": 3,
    "ch_ry_cnot": 3,  # Ry(-pi/4) CNot Ry(pi/4) on the target
    "cv_cvdg_h_cz": 3,  # CV^dagger cubed, since CV^4 = I
    "identity_target": 0,
}


def names() -> list[str]:
    return list(_DOCS)


def document(name: str) -> dict:
    return yaml.safe_load(_DOCS[name])


def spec(name: str) -> ProblemSpec:
    return parse_spec(_DOCS[name], source=f"catalog:{name}")
