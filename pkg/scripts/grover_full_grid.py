"""Grover diffusion over the full pi/2 U3 grid (34 distinct U3 gates plus CNOT).

The acceptance test uses a real sub-grid that contains the same optima. This
script runs the complex full-grid model, which takes several minutes per phase
candidate on one core.

    python scripts/grover_full_grid.py [--time-limit 3600] [--workers 4] [--oracle]
"""

import argparse

from circuitmip.oracle import enumerate_exhaustive
from circuitmip.problem import parse_spec, presolve
from circuitmip.synthesis import SolveOptions, decompose

DOC = """
num_qubits: 2
maximum_depth: 4
elementary_gates: [U3_1, U3_2, CNot_1_2, Identity]
angles:
  U3: {theta: [0, pi/2, pi], phi: [0, pi/2, pi], lambda: [0, pi/2, pi]}
target_gate: GroverDiffusion
"""


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--time-limit", type=float, default=3600.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--oracle", action="store_true", help="also run exhaustive enumeration")
    args = ap.parse_args()

    p = presolve(parse_spec(DOC))
    print(f"{len(p.gates)} gates, real model: {p.all_real}, phases {len(p.phase_candidates)}")
    if args.oracle:
        o = enumerate_exhaustive(p)
        print(f"oracle: {o.objective} {o.labels} ({o.runtime:.1f}s, {o.checked} sequences)")
    d = decompose(p, SolveOptions(time_limit=args.time_limit, workers=args.workers))
    print(f"mip: {d.status} {d.objective} {d.labels} nodes={d.nodes} {d.runtime:.0f}s")


if __name__ == "__main__":
    main()
