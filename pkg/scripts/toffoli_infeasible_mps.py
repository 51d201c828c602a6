"""Export the Toffoli-from-{T, T-dagger, CNOT} models and hand them to CBC.

No exact decomposition exists, so every phase candidate should come back
infeasible. The run can take hours; exported files stay in --outdir so any
other MIP solver can be pointed at them.

    python scripts/toffoli_infeasible_mps.py [--depth 10] [--time-limit 86400] [--outdir mps/]
"""

import argparse
import dataclasses
import time
from pathlib import Path

from circuitmip.formulation import build_model
from circuitmip.mps import export_mps, find_cbc, solve_external
from circuitmip.problem import load_spec, presolve

PROBLEM = Path(__file__).resolve().parents[1] / "problems" / "toffoli_t_infeasible.yaml"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=10)
    ap.add_argument("--time-limit", type=float, default=86400.0, help="per phase candidate")
    ap.add_argument("--outdir", type=Path, default=Path("mps"))
    ap.add_argument("--export-only", action="store_true")
    args = ap.parse_args()

    p = presolve(dataclasses.replace(load_spec(PROBLEM), maximum_depth=args.depth))
    args.outdir.mkdir(parents=True, exist_ok=True)
    if not args.export_only and find_cbc() is None:
        raise SystemExit("no CBC binary found; set CBC_PATH or install pulp")
    for k, phase in enumerate(p.phase_candidates):
        model = build_model(p, phase)
        path = args.outdir / f"toffoli_t_d{args.depth}_phase{k}.mps"
        text = export_mps(model, path.stem)
        path.write_text(text)
        print(f"{path}: {model.num_vars} columns, {model.num_rows} rows, phase {phase:g}", flush=True)
        if args.export_only:
            continue
        t = time.perf_counter()
        res = solve_external(text, args.time_limit)
        print(f"  cbc: {res.status} {res.objective} ({time.perf_counter() - t:.0f}s)", flush=True)


if __name__ == "__main__":
    main()
