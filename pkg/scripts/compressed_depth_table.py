"""Compressed depth of textbook circuits against their shortest U3 + CNOT forms.

    python scripts/compressed_depth_table.py
"""

from circuitmip.gates import parse_label
from circuitmip.postprocess import ascii_diagram, compressed_depth, depth_reduction, verify_circuit
from circuitmip.problem import named_target

PHASES = (1, -1, 1j, -1j)
PAIRS = {
    "Magic": (
        ["CNot_2_1", "S_1", "H_2", "S_2"],
        ["CNot_2_1", "U3_1(0,-pi/2,pi)", "U3_2(-pi/2,pi,pi/2)"],
    ),
    "GroverDiffusion": (
        ["H_1", "H_2", "X_1", "X_2", "H_2", "CNot_1_2", "H_2", "X_1", "X_2", "H_1", "H_2"],
        ["U3_1(pi/2,pi,0)", "CNot_1_2", "U3_1(pi/2,0,0)"],
    ),
}


def main() -> None:
    for target, (textbook, optimal) in PAIRS.items():
        depths = []
        for labels in (textbook, optimal):
            circuit = [parse_label(x) for x in labels]
            ok, phase, resid = verify_circuit(circuit, named_target(target, 2), PHASES)
            assert ok, f"{target}: {labels} does not implement the target"
            depths.append(compressed_depth(circuit))
            print(f"{target}: {len(labels)} gates, compressed depth {depths[-1]}, phase {phase:g}")
            print(ascii_diagram(circuit, 2))
        print(f"{target}: compressed depth {depths[0]} -> {depths[1]}, reduction {depth_reduction(*depths):.1f}%\n")


if __name__ == "__main__":
    main()
