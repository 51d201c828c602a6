"""Random sampling against a certified MIP optimum on three-qubit instances.

Two instance families:

* ``--problem FILE --depth D``: any problem file with its slot budget overridden.
  The default is problems/ghz_prep.yaml at 14 slots, where uniform full-length
  draws almost never contain the 11 Identity slots that the 3-gate optimum needs.
* ``--ncv TARGET --depth D``: CNOT, controlled-V and controlled-V-dagger on every
  ordered qubit pair, e.g. ``--ncv Fredkin --depth 7``.

Random search runs for a fixed time per seed. The MIP side runs the embedded
branch and bound, or exports each phase candidate to MPS and calls CBC.

    python scripts/brute_force_vs_mip.py --seeds 0 1 2 --random-limit 500
    python scripts/brute_force_vs_mip.py --ncv Fredkin --depth 7 --certify cbc --mip-limit 86400
"""

import argparse
import dataclasses
import time
from pathlib import Path

from circuitmip.formulation import build_model
from circuitmip.mps import find_cbc, solve_external
from circuitmip.oracle import enumerate_random
from circuitmip.problem import load_spec, parse_spec, presolve
from circuitmip.synthesis import SolveOptions, decompose

PAIRS = [(1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)]
NCV_GATES = [f"{fam}_{a}_{b}" for fam in ("CNot", "CV", "CVdagger") for a, b in PAIRS] + ["Identity"]
GHZ_PREP = Path(__file__).resolve().parents[1] / "problems" / "ghz_prep.yaml"


def certify_external(p, time_limit: float) -> tuple[str, float | None]:
    """Min over phase candidates of CBC's answer; ``time_limit`` applies per phase."""
    best, undecided = None, False
    for phase in p.phase_candidates:
        res = solve_external(build_model(p, phase), time_limit)
        print(f"  cbc phase {phase:g}: {res.status} {res.objective}", flush=True)
        if res.status == "optimal":
            best = res.objective if best is None else min(best, res.objective)
        elif res.status != "infeasible":
            undecided = True
    if undecided:
        return "time_limit", best
    return ("optimal", best) if best is not None else ("infeasible", None)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--problem", type=Path, default=GHZ_PREP)
    src.add_argument("--ncv", metavar="TARGET", help="named three-qubit target over the NCV library")
    ap.add_argument("--depth", type=int, default=None, help="slot budget (default 14, or 7 with --ncv)")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    ap.add_argument("--random-limit", type=float, default=500.0)
    ap.add_argument("--certify", choices=["cbc", "embedded", "none"], default="embedded")
    ap.add_argument("--mip-limit", type=float, default=86400.0)
    args = ap.parse_args()

    if args.ncv:
        doc = {"num_qubits": 3, "maximum_depth": args.depth or 7, "elementary_gates": NCV_GATES, "target_gate": args.ncv}
        spec, name = parse_spec(doc), args.ncv
    else:
        spec = dataclasses.replace(load_spec(args.problem), maximum_depth=args.depth or 14)
        name = args.problem.stem
    p = presolve(spec)
    print(f"{name}: {len(p.gates)} natives, depth {p.maximum_depth}, {len(p.phase_candidates)} phases", flush=True)
    for seed in args.seeds:
        r = enumerate_random(p, args.random_limit, seed)
        found = f"{r.objective:g} {r.labels}" if r.found else "nothing"
        print(f"random seed {seed}: {found} after {r.samples} samples ({r.runtime:.0f}s)", flush=True)

    t = time.perf_counter()
    if args.certify == "embedded":
        d = decompose(p, SolveOptions(time_limit=args.mip_limit))
        print(f"embedded mip: {d.status} {d.objective} {d.labels} ({time.perf_counter() - t:.0f}s)")
    elif args.certify == "cbc":
        if find_cbc() is None:
            raise SystemExit("no CBC binary found; set CBC_PATH or install pulp")
        status, obj = certify_external(p, args.mip_limit)
        print(f"cbc: {status} {obj} ({time.perf_counter() - t:.0f}s)")


if __name__ == "__main__":
    main()
