"""Command-line front end: ``python -m circuitmip {solve,enumerate,export,verify}``.

Exit codes: 0 optimal / found / verified, 1 error, 2 infeasible,
3 time limit without proof, 4 circuit does not match the target.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime as dt
import json
import logging
import sys
from pathlib import Path

import yaml

from .formulation import build_model
from .gates import GateError, parse_label
from .mps import export_mps
from .oracle import OracleBudgetError, enumerate_exhaustive, enumerate_random
from .postprocess import Decomposition, compressed_depth, format_phase, report, verify_circuit
from .problem import OBJECTIVES, ProblemError, load_spec, named_target, presolve
from .synthesis import SolveOptions, decompose

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_TIME_LIMIT, EXIT_MISMATCH = 0, 1, 2, 3, 4
STATUS_EXIT = {
    "optimal": EXIT_OK,
    "approximate": EXIT_OK,
    "infeasible": EXIT_INFEASIBLE,
    "time_limit": EXIT_TIME_LIMIT,
}

log = logging.getLogger("circuitmip")


def parse_phase(text: str) -> complex:
    """'1', '-1', 'i', '-i', '0.6+0.8i' or Python complex syntax."""
    t = text.strip().replace(" ", "")
    if t in ("i", "+i", "-i"):
        return complex(0, -1 if t.startswith("-") else 1)
    return complex(t.replace("i", "j"))


def _phase_set(text: str | None):
    if text is None:
        return None
    return tuple(parse_phase(x) for x in text.split(",") if x.strip())


def _load_problem(args):
    spec = load_spec(args.problem)
    changes = {}
    if getattr(args, "phase_set", None):
        changes["phase_candidates"] = _phase_set(args.phase_set)
    if getattr(args, "seed", None) is not None:
        changes["rng_seed"] = args.seed
    if getattr(args, "objective", None):
        changes["objective"] = args.objective
    if changes:
        spec = dataclasses.replace(spec, **changes)
    return presolve(spec)


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds")


def _write(doc: dict, path: Path) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    log.info("wrote %s", path)


def _out_path(args, suffix: str) -> Path:
    if getattr(args, "output", None):
        return Path(args.output)
    src = Path(args.problem)
    return src.with_name(src.stem + suffix)


def cmd_solve(args) -> int:
    started = _now()
    p = _load_problem(args)
    opts = SolveOptions(
        valid_inequalities=not args.no_valid_constraints,
        time_limit=args.time_limit,
        node_order=args.node_order,
        workers=args.workers,
    )
    dec = decompose(p, opts)
    doc, text = report(dec, started)
    doc["input"] = Path(args.problem).name
    doc["flags"] = {
        "valid_constraints": not args.no_valid_constraints,
        "objective": p.objective,
        "node_order": args.node_order,
        "seed": p.rng_seed,
        "workers": args.workers,
    }
    _write(doc, _out_path(args, ".result.json"))
    if not args.quiet:
        print(text)
    return STATUS_EXIT.get(dec.status, EXIT_ERROR)


def cmd_enumerate(args) -> int:
    started = _now()
    p = _load_problem(args)
    if args.mode == "exhaustive":
        res = enumerate_exhaustive(p, workers=args.workers)
        circuit = [p.gates[g].spec for g in res.sequence if g != p.identity_index]
        dec = Decomposition(
            circuit=circuit,
            objective=res.objective,
            cnot_count=sum(g.cnot_count for g in circuit),
            depth=len(circuit),
            compressed_depth=compressed_depth(circuit),
            phase=res.phase,
            status=res.status,
            lower_bound=res.objective,
            gap=0.0 if res.status == "optimal" else None,
            runtime=res.runtime,
            source="exhaustive",
            num_qubits=p.num_qubits,
            target_label=p.target_label,
            details={"sequences_checked": res.checked},
        )
    else:
        limit = args.time_limit if args.time_limit is not None else p.time_limit
        res = enumerate_random(p, limit, p.rng_seed, max_samples=args.max_samples)
        circuit = [p.gates[g].spec for g in (res.sequence or ()) if g != p.identity_index]
        dec = Decomposition(
            circuit=circuit,
            objective=res.objective,
            cnot_count=sum(g.cnot_count for g in circuit),
            depth=len(circuit),
            compressed_depth=compressed_depth(circuit),
            phase=res.phase,
            # a random search proves nothing: a match is only "found"
            status="optimal" if res.found else "time_limit",
            runtime=res.runtime,
            source="random_search",
            num_qubits=p.num_qubits,
            target_label=p.target_label,
            details={"samples": res.samples, "best_residual": res.best_residual, "trace": res.trace},
        )
    if dec.circuit or dec.objective is not None:
        ok, _, dec.residual = verify_circuit(dec.circuit, p.target, [dec.phase], num_qubits=p.num_qubits)
    doc, text = report(dec, started)
    doc["input"] = Path(args.problem).name
    _write(doc, _out_path(args, f".{args.mode}.json"))
    if not args.quiet:
        print(text)
    return STATUS_EXIT.get(dec.status, EXIT_ERROR)


def cmd_export(args) -> int:
    p = _load_problem(args)
    src = Path(args.problem)
    phases = p.phase_candidates if args.phase is None else (parse_phase(args.phase),)
    outdir = Path(args.output) if args.output else src.parent
    outdir.mkdir(parents=True, exist_ok=True)
    for k, c in enumerate(phases):
        model = build_model(p, c, valid_inequalities=not args.no_valid_constraints)
        name = f"{src.stem}_phase{k}"
        model.name = name
        path = outdir / f"{name}.mps"
        path.write_text(export_mps(model, name), encoding="utf-8")
        print(f"{path}  phase={format_phase(c)}  vars={model.num_vars} rows={model.num_rows}")
        if model.infeasible_reason:
            print(f"  note: {model.infeasible_reason}")
    return EXIT_OK


def _read_circuit(path: Path):
    data = yaml.safe_load(path.read_text(encoding="utf-8"))
    if isinstance(data, dict):
        return data.get("circuit") or [], data.get("target"), data.get("num_qubits")
    if isinstance(data, list):
        return data, None, None
    raise ValueError(f"{path}: expected a list of gate labels or a result document")


def cmd_verify(args) -> int:
    labels, target_name, n = _read_circuit(Path(args.circuit))
    target_name = args.target or target_name
    n = args.num_qubits or n
    if not target_name or not n:
        raise ValueError("verify needs --target and --num-qubits (or a result document providing them)")
    circuit = [parse_label(str(x)) for x in labels]
    target = named_target(target_name, int(n))
    phases = _phase_set(args.phase_set) or (1, -1, 1j, -1j)
    ok, phase, resid = verify_circuit(circuit, target, phases, tol=args.tol, num_qubits=int(n))
    print(f"{'ok' if ok else 'mismatch'}: phase {format_phase(phase)}, residual {resid:.3e}")
    return EXIT_OK if ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="circuitmip", description="Provably optimal gate decompositions via MIP.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("problem", help="problem file (YAML or JSON)")
        sp.add_argument("--objective", choices=OBJECTIVES)
        sp.add_argument("--phase-set", help="comma-separated global phases, e.g. '1,-1,i,-i'")
        sp.add_argument("--seed", type=int)
        sp.add_argument("-o", "--output")

    s = sub.add_parser("solve", help="solve the MIP for every phase candidate")
    common(s)
    s.add_argument("--no-valid-constraints", action="store_true", help="omit the symmetry and redundancy cuts")
    s.add_argument("--time-limit", type=float)
    s.add_argument("--node-order", choices=("best_bound", "depth_first"), default="best_bound")
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("-q", "--quiet", action="store_true")
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("enumerate", help="brute-force baseline")
    common(e)
    e.add_argument("--mode", choices=("exhaustive", "random"), default="exhaustive")
    e.add_argument("--time-limit", type=float)
    e.add_argument("--max-samples", type=int)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("-q", "--quiet", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    x = sub.add_parser("export", help="write one MPS file per phase candidate")
    common(x)
    x.add_argument("--phase", help="export only this phase")
    x.add_argument("--no-valid-constraints", action="store_true")
    x.set_defaults(func=cmd_export)

    v = sub.add_parser("verify", help="check a circuit against a named target")
    v.add_argument("circuit", help="YAML/JSON list of gate labels, or a result document")
    v.add_argument("--target")
    v.add_argument("--num-qubits", type=int)
    v.add_argument("--phase-set")
    v.add_argument("--tol", type=float, default=1e-4)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ProblemError, GateError, OracleBudgetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
