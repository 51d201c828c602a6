"""End-to-end decomposition: one MIP per global-phase candidate, best one wins."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .formulation import assignment_from_sequence, build_model
from .oracle import enumerate_random
from .postprocess import Decomposition, compressed_depth, extract_circuit, verify_circuit
from .problem import PresolvedProblem
from .solver import EPS_GAP, MIPResult, round_heuristic, solve_mip

log = logging.getLogger(__name__)


@dataclass
class SolveOptions:
    valid_inequalities: bool = True
    objective: str | None = None  # overrides the problem's objective
    time_limit: float | None = None  # overrides the problem's limit; shared by all phases
    node_order: str = "best_bound"
    workers: int = 1
    random_fallback_limit: float | None = None  # approximate mode; default is the time left


@dataclass
class PhaseRun:
    phase: complex
    result: MIPResult
    model_size: tuple  # (vars, rows)


def _warm_start_vector(model, p: PresolvedProblem):
    if p.warm_start is None:
        return None
    prod = np.eye(2**p.num_qubits, dtype=complex)
    for g in p.warm_start:
        prod = prod @ p.gates[g].matrix
    if np.max(np.abs(prod - model.phase * p.target.matrix)) > 1e-6:
        return None
    return assignment_from_sequence(model, p, p.warm_start)


def _solve_phase(p: PresolvedProblem, phase: complex, opts: SolveOptions, time_limit: float, cutoff: float):
    model = build_model(p, phase, valid_inequalities=opts.valid_inequalities)

    def rounding(x):
        return round_heuristic(x, model, p)

    res = solve_mip(
        model,
        time_limit=time_limit,
        warm_start=_warm_start_vector(model, p),
        emphasize_optimality=p.emphasize_optimality,
        node_order=opts.node_order,
        cutoff=cutoff,
        heuristic=rounding,
        accept=rounding,
        labels=p.labels,
    )
    return PhaseRun(complex(phase), res, (model.num_vars, model.num_rows))


def _solve_phase_remote(args):
    p, phase, opts, limit = args
    return _solve_phase(p, phase, opts, limit, math.inf)


def decompose(p: PresolvedProblem, opts: SolveOptions | None = None) -> Decomposition:
    """Solve every phase candidate and report the best circuit.

    Single-worker runs pass each incumbent on as a cutoff, so a later phase
    only reports strictly better circuits and ties go to the earlier phase.
    With several workers the phases run independently and the merge applies
    the same tie rule.
    """
    opts = opts or SolveOptions()
    if opts.objective:
        p = p.with_options(objective=opts.objective)
    budget = opts.time_limit if opts.time_limit is not None else p.time_limit
    start = time.perf_counter()
    runs: list[PhaseRun] = []
    best = None  # (objective, run)

    if opts.workers > 1 and len(p.phase_candidates) > 1:
        jobs = [(p, c, opts, budget) for c in p.phase_candidates]
        with ProcessPoolExecutor(max_workers=opts.workers) as pool:
            runs = list(pool.map(_solve_phase_remote, jobs))
        for run in runs:
            if run.result.x is not None and (best is None or run.result.objective < best[0] - EPS_GAP):
                best = (run.result.objective, run)
    else:
        for c in p.phase_candidates:
            left = budget - (time.perf_counter() - start)
            if left <= 0:
                break
            cutoff = best[0] if best else math.inf
            run = _solve_phase(p, c, opts, left, cutoff)
            runs.append(run)
            log.info("phase %s: %s obj=%s nodes=%d", c, run.result.status, run.result.objective, run.result.nodes)
            if run.result.x is not None and (best is None or run.result.objective < best[0] - EPS_GAP):
                best = (run.result.objective, run)

    unfinished = len(runs) < len(p.phase_candidates) or any(r.result.status == "time_limit" for r in runs)
    bounds = [r.result.lower_bound for r in runs]
    if len(runs) < len(p.phase_candidates):
        bounds.append(-math.inf)
    lower = min(bounds + [best[0] if best else math.inf])
    nodes = sum(r.result.nodes for r in runs)
    details = {
        "phases": [
            {
                "phase": {"re": r.phase.real + 0.0, "im": r.phase.imag + 0.0},
                "status": r.result.status,
                "objective": r.result.objective if math.isfinite(r.result.objective) else None,
                "nodes": r.result.nodes,
                "vars": r.model_size[0],
                "rows": r.model_size[1],
            }
            for r in runs
        ]
    }

    if best is not None:
        obj, run = best
        model = build_model(p, run.phase, valid_inequalities=opts.valid_inequalities)
        dec = extract_circuit(run.result.x, p, model)
        ok, _, resid = verify_circuit(dec.circuit, p.target, [run.phase], num_qubits=p.num_qubits)
        if not ok:
            raise RuntimeError(f"solver circuit fails verification (residual {resid:.3g})")
        dec.residual = resid
        dec.status = "time_limit" if unfinished else "optimal"
        dec.lower_bound = lower if unfinished else obj
        dec.gap = (obj - dec.lower_bound) / max(1.0, abs(obj)) if math.isfinite(dec.lower_bound) else math.inf
    else:
        status = "time_limit" if unfinished else "infeasible"
        dec = Decomposition(circuit=[], status=status, lower_bound=lower, num_qubits=p.num_qubits)
        dec.target_label = p.target_label
        if p.decomposition_type == "approximate":
            left = budget - (time.perf_counter() - start)
            limit = opts.random_fallback_limit or max(left, 1.0)
            dec = _random_fallback(p, limit, dec)
    dec.nodes = nodes
    dec.runtime = time.perf_counter() - start
    dec.details.update(details)
    return dec


def _random_fallback(p: PresolvedProblem, limit: float, exact: Decomposition) -> Decomposition:
    """Best circuit seen by random search, reported with its residual."""
    rs = enumerate_random(p, limit, p.rng_seed)
    seq = rs.sequence if rs.found else rs.best_residual_sequence
    if seq is None:
        return exact
    circuit = [p.gates[g].spec for g in seq if g != p.identity_index]
    ok, phase, resid = verify_circuit(circuit, p.target, p.phase_candidates, num_qubits=p.num_qubits)
    weights = p.objective_weights()
    return Decomposition(
        circuit=circuit,
        objective=float(sum(weights[g] for g in seq)),
        cnot_count=sum(g.cnot_count for g in circuit),
        depth=len(circuit),
        compressed_depth=compressed_depth(circuit),
        phase=phase,
        status="approximate",
        lower_bound=exact.lower_bound,
        residual=resid,
        source="random_search",
        num_qubits=p.num_qubits,
        target_label=p.target_label,
        details={"exact_status": exact.status, "random_samples": rs.samples, "exact_match": ok},
    )
