import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circuitmip.gates import (
    GateError,
    GateSpec,
    Unitary,
    build_small_unitary,
    circuit_unitary,
    classify_pair,
    classify_single,
    discretize,
    embed,
    equiv_up_to_phase,
    format_angle,
    is_pattern,
    lift_to_circuit,
    parse_angle,
    parse_label,
)

R = 1 / math.sqrt(2)

# hand-entered reference matrices (basis order |q1 q2 ...>, qubit 1 most significant)
CNOT_12 = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
CNOT_21 = np.array([[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]])
H1_2Q = R * np.array([[1, 0, 1, 0], [0, 1, 0, 1], [1, 0, -1, 0], [0, 1, 0, -1]])
H2_2Q = R * np.array([[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 1], [0, 0, 1, -1]])
CZ = np.diag([1, 1, 1, -1])


def mat(label, n):
    return lift_to_circuit(parse_label(label), n).matrix


def perm_matrix(images):
    m = np.zeros((len(images), len(images)))
    for src, dst in enumerate(images):
        m[dst, src] = 1
    return m


class TestSmallMatrices:
    def test_cnot_orientations(self):
        assert np.array_equal(mat("CNot_1_2", 2), CNOT_12)
        assert np.array_equal(mat("CNot_2_1", 2), CNOT_21)

    def test_hadamard_placements(self):
        assert np.allclose(mat("H_1", 2), H1_2Q)
        assert np.allclose(mat("H_2", 2), H2_2Q)

    def test_three_qubit_cnot_far_control(self):
        # control on qubit 3 (least significant), target qubit 1: |a b 1> -> |~a b 1>
        images = list(range(8))
        images[1], images[5], images[3], images[7] = 5, 1, 7, 3
        assert np.array_equal(mat("CNot_3_1", 3), perm_matrix(images))

    def test_u3_half_angle_convention(self):
        # U3(pi, 0, pi) = X and U3(pi/2, 0, pi) = H under the half-angle convention
        assert np.allclose(mat("U3_1(pi,0,pi)", 1), [[0, 1], [1, 0]])
        assert np.allclose(mat("U3_1(pi/2,0,pi)", 1), R * np.array([[1, 1], [1, -1]]))
        u = mat("U3_1(pi/2,pi/2,0)", 1)
        assert np.allclose(u, R * np.array([[1, -1], [1j, 1j]]))

    def test_rotations(self):
        assert np.allclose(mat("Rz_1(pi)", 1), np.diag([-1j, 1j]))
        assert np.allclose(mat("Rx_1(pi)", 1), [[0, -1j], [-1j, 0]])
        assert np.allclose(mat("Ry_1(pi)", 1), [[0, -1], [1, 0]])

    def test_controlled_gates(self):
        assert np.allclose(mat("CZ_1_2", 2), CZ)
        ch = mat("CH_1_2", 2)
        assert np.allclose(ch[:2, :2], np.eye(2)) and np.allclose(ch[2:, 2:], R * np.array([[1, 1], [1, -1]]))
        cv = mat("CV_1_2", 2)
        assert np.allclose(cv[2:, 2:] @ cv[2:, 2:], [[0, 1], [1, 0]])
        assert np.allclose(mat("CV_1_2", 2) @ mat("CVdagger_1_2", 2), np.eye(4))

    def test_named_two_qubit_gates_are_unitary(self):
        for fam in ("Swap", "iSwap", "Magic", "GroverDiffusion", "Sycamore", "QFT2"):
            assert build_small_unitary(GateSpec(fam, (1, 2))).is_unitary(), fam

    def test_swap_placement_is_symmetric(self):
        assert np.allclose(mat("Swap_1_2", 2), mat("Swap_2_1", 2))

    def test_kron_product_lifts_factorwise(self):
        assert np.allclose(mat("H_1⊗S_2", 2), np.kron(R * np.array([[1, 1], [1, -1]]), np.diag([1, 1j])))

    def test_reversed_two_qubit_placement(self):
        # iSwap is symmetric, CZ is symmetric, CNot is not
        assert np.allclose(mat("CZ_2_1", 2), CZ)
        assert not np.allclose(mat("CNot_2_1", 2), CNOT_12)


class TestLabels:
    @pytest.mark.parametrize(
        "label",
        ["H_1", "CNot_1_2", "U3_2(0,pi/2,pi)", "Identity", "Rz_3(-3pi/4)", "H_1⊗T_2", "CVdagger_2_1"],
    )
    def test_round_trip(self, label):
        assert parse_label(label).label == label

    def test_aliases(self):
        assert parse_label("CNOT_1_2").family == "CNot"
        assert parse_label("I").family == "Identity"

    @pytest.mark.parametrize("bad", ["Foo_1", "H", "CNot_1", "CNot_1_1", "U3_1(0,0)", "H_0", "H_1(", ""])
    def test_rejects(self, bad):
        with pytest.raises(GateError):
            parse_label(bad)

    def test_missing_angles_become_patterns(self):
        assert is_pattern(parse_label("U3_1", allow_missing_angles=True))
        with pytest.raises(GateError):
            parse_label("U3_1")

    @pytest.mark.parametrize(
        "text, value",
        [("pi/2", math.pi / 2), ("-3pi/4", -0.75 * math.pi), ("3*pi/2", 1.5 * math.pi), ("0.25", 0.25), ("π", math.pi)],
    )
    def test_parse_angle(self, text, value):
        assert parse_angle(text) == pytest.approx(value)

    @pytest.mark.parametrize("value, text", [(0.0, "0"), (math.pi, "pi"), (-math.pi / 2, "-pi/2"), (0.75 * math.pi, "3pi/4")])
    def test_format_angle(self, value, text):
        assert format_angle(value) == text

    @given(st.integers(-32, 32), st.sampled_from([1, 2, 3, 4, 8, 16]))
    def test_format_parse_round_trip(self, num, den):
        theta = num * math.pi / den
        assert parse_angle(format_angle(theta)) == pytest.approx(theta, abs=1e-12)


angles = st.floats(-2 * math.pi, 2 * math.pi, allow_nan=False)


class TestProperties:
    @given(angles, angles, angles)
    def test_u3_is_unitary(self, t, p, l):
        assert Unitary(mat(f"U3_1({t!r},{p!r},{l!r})", 1)).is_unitary(1e-9)

    @given(angles, st.sampled_from(["H_1", "CNot_1_2", "U3_2(pi/2,pi,0)", "iSwap_1_2"]))
    def test_phase_equivalence_recovers_phase(self, phi, label):
        u = mat(label, 2)
        c = cmath.exp(1j * phi)
        ok, found = equiv_up_to_phase(c * u, u)
        assert ok and abs(found - c) < 1e-9

    def test_phase_equivalence_rejects(self):
        assert not equiv_up_to_phase(mat("H_1", 2), mat("H_2", 2))[0]
        assert not equiv_up_to_phase(2 * np.eye(2), np.eye(2))[0]

    @given(st.permutations([1, 2, 3]))
    def test_embed_matches_kron_for_ordered_placement(self, order):
        rng = np.random.default_rng(0)
        ops = {q: rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for q in (1, 2, 3)}
        full = np.eye(8, dtype=complex)
        for q in order:
            full = full @ embed(ops[q], [q], 3)
        assert np.allclose(full, np.kron(np.kron(ops[1], ops[2]), ops[3]))

    def test_circuit_unitary_order(self):
        gates = [lift_to_circuit(parse_label(x), 2) for x in ("H_2", "CNot_1_2", "H_2")]
        assert np.allclose(circuit_unitary(gates, 2), CZ)

    def test_lift_rejects_out_of_range(self):
        with pytest.raises(GateError):
            lift_to_circuit(parse_label("CNot_1_3"), 2)


class TestDiscretizeAndClassify:
    def test_discretize_counts_and_order(self):
        specs = discretize("U3", [[0, 1], [0, 1, 2], [0]], [(1,), (2,)])
        assert len(specs) == 12
        assert specs[0].angles == (0, 0, 0) and specs[1].angles == (0, 1, 0)
        assert specs[6].qubits == (2,)

    def test_discretize_errors(self):
        with pytest.raises(GateError):
            discretize("H", [[0]])
        with pytest.raises(GateError):
            discretize("U3", [[0], [0]])

    def test_single_flags(self):
        assert classify_single(mat("H_1", 1)).involutory
        s = classify_single(mat("Y_1", 1))
        assert s.involutory and s.square_phase == pytest.approx(1)
        assert not classify_single(mat("S_1", 1)).involutory
        assert classify_single(np.eye(2)).idempotent

    def test_pair_flags(self):
        h1, h2, cx, z1 = (mat(x, 2) for x in ("H_1", "H_2", "CNot_1_2", "Z_1"))
        assert classify_pair(h1, h2).commute
        assert classify_pair(cx, z1).commute
        assert not classify_pair(h1, cx).commute
        s = mat("S_1", 2)
        flags = classify_pair(s, s, natives=[h1, z1])
        assert flags.redundant_product_index == 1 and flags.product_phase == pytest.approx(1)
