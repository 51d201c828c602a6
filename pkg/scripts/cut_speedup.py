"""Nodes and runtime with and without the gate-pair cuts on every catalog instance.

    python scripts/cut_speedup.py [--time-limit 600] [--only NAME ...]
"""

import argparse
import statistics

from circuitmip import catalog
from circuitmip.problem import presolve
from circuitmip.synthesis import SolveOptions, decompose


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--time-limit", type=float, default=600.0)
    ap.add_argument("--only", nargs="*", default=None)
    args = ap.parse_args()

    names = args.only or catalog.names()
    print(f"{'instance':<26}{'obj':>6}{'nodes+cuts':>12}{'s+cuts':>9}{'nodes':>10}{'s':>9}  agree")
    ratios = []
    for name in names:
        p = presolve(catalog.spec(name))
        runs = [decompose(p, SolveOptions(valid_inequalities=v, time_limit=args.time_limit)) for v in (True, False)]
        cut, plain = runs
        agree = (cut.status, cut.objective) == (plain.status, plain.objective)
        obj = "-" if cut.status == "infeasible" else f"{cut.objective:g}"
        print(
            f"{name:<26}{obj:>6}{cut.nodes:>12}{cut.runtime:>9.1f}{plain.nodes:>10}{plain.runtime:>9.1f}  {agree}"
        )
        if cut.runtime > 0:
            ratios.append(plain.runtime / cut.runtime)
    if ratios:
        print(f"median runtime ratio without/with cuts: {statistics.median(ratios):.2f}")


if __name__ == "__main__":
    main()
