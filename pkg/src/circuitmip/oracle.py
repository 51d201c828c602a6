"""Brute-force ground truth: exhaustive and random enumeration of gate sequences.

Nothing here touches the MIP machinery; the only shared pieces are the gate
matrices from presolve and the acceptance tolerance.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .problem import PresolvedProblem

EPS_FEAS = 1e-4
GUARD_LIMIT = 10**8


class OracleBudgetError(RuntimeError):
    def __init__(self, required: int, limit: int):
        super().__init__(f"exhaustive enumeration needs {required:.3g} sequences, above the guard limit {limit:.3g}")
        self.required = required
        self.limit = limit


@dataclass
class OracleResult:
    status: str  # optimal | infeasible
    objective: float | None
    sequence: tuple  # gate indices; only an Identity target yields (Identity,)
    labels: list
    phase: complex | None
    checked: int
    runtime: float

    @property
    def depth(self) -> int:
        return len(self.sequence)


@dataclass
class RandomSearchResult:
    found: bool
    objective: float | None
    sequence: tuple | None  # full draw, Identity slots included
    labels: list | None
    phase: complex | None
    samples: int
    runtime: float
    trace: list = field(default_factory=list)  # (sample index, objective) at each improvement
    best_residual: float = math.inf
    best_residual_sequence: tuple | None = None


def _targets(p: PresolvedProblem) -> np.ndarray:
    return np.stack([c * p.target.matrix for c in p.phase_candidates])


def _matches(products: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """(..., dim, dim) products against (P, dim, dim) targets -> (..., P) booleans."""
    diff = np.abs(products[..., None, :, :] - targets)
    return diff.max(axis=(-2, -1)) <= EPS_FEAS


def sequence_count(num_gates: int, depth: int) -> int:
    return num_gates**depth


@dataclass
class _Scan:
    """Enumeration of all identity-free sequences of one length under a fixed first gate."""

    mats: np.ndarray  # identity-free gate matrices
    weights: np.ndarray
    targets: np.ndarray
    length: int
    first: int
    scan_all: bool  # True: minimize a weight over all matches; False: stop at first match
    bound: float  # only strictly smaller objectives are interesting

    def run(self):
        best = None  # (objective, sequence, phase index)
        checked = 0
        G = len(self.mats)
        bound = self.bound

        def leaf_block(prefix_mat, prefix, cost):
            nonlocal best, checked, bound
            rest = self.length - len(prefix)
            if rest == 1:
                prods = prefix_mat @ self.mats
                costs = cost + self.weights
                shape = (G,)
            else:
                prods = prefix_mat @ self.mats[:, None] @ self.mats[None, :]
                costs = cost + self.weights[:, None] + self.weights[None, :]
                shape = (G, G)
            checked += int(np.prod(shape))
            hit = _matches(prods, self.targets)  # shape + (P,)
            ok = hit.any(axis=-1) & (costs < bound - 1e-9)
            if not ok.any():
                return False
            flat_ok = ok.ravel()
            flat_cost = costs.ravel()
            if self.scan_all:
                cand = np.flatnonzero(flat_ok)
                k = int(cand[np.argmin(flat_cost[cand])])  # argmin keeps the first of ties
            else:
                k = int(np.flatnonzero(flat_ok)[0])
            tail = np.unravel_index(k, shape)
            seq = tuple(prefix) + tuple(int(t) for t in tail)
            phase = int(np.argmax(hit.reshape(-1, hit.shape[-1])[k]))
            best = (float(flat_cost[k]), seq, phase)
            bound = best[0]
            return not self.scan_all

        def walk(prefix_mat, prefix, cost):
            if self.length - len(prefix) <= 2:
                return leaf_block(prefix_mat, prefix, cost)
            for g in range(G):
                c = cost + self.weights[g]
                if self.scan_all and c >= bound - 1e-9 and self.weights.min() >= 0:
                    continue
                if walk(prefix_mat @ self.mats[g], prefix + [g], c):
                    return True
            return False

        if self.length == 1:
            prods = self.mats[self.first][None]
            checked = 1
            hit = _matches(prods, self.targets)[0]
            cost = float(self.weights[self.first])
            if hit.any() and cost < bound - 1e-9:
                best = (cost, (self.first,), int(np.argmax(hit)))
        else:
            walk(self.mats[self.first], [self.first], float(self.weights[self.first]))
        return best, checked


def _run_scan(scan: _Scan):
    return scan.run()


def enumerate_exhaustive(
    p: PresolvedProblem,
    max_depth: int | None = None,
    *,
    objective: str | None = None,
    guard_limit: int = GUARD_LIMIT,
    workers: int = 1,
) -> OracleResult:
    """Try every gate sequence of length 1..max_depth in (length, lexicographic) order.

    Lexicographic order is the presolved gate order. Sequences containing
    Identity are skipped except for the single-gate ``[Identity]``, because any
    such sequence matches only if its identity-free subsequence (tried earlier)
    does. For ``minimize_depth`` the first match is optimal; for
    ``minimize_cnot`` every length is scanned, with prefixes pruned once their
    CNOT count reaches the best match.
    """
    start = time.perf_counter()
    D = max_depth or p.maximum_depth
    which = objective or p.objective
    required = sequence_count(len(p.gates), D)
    if required > guard_limit:
        raise OracleBudgetError(required, guard_limit)
    targets = _targets(p)
    weights_all = p.objective_weights(which)
    ident = p.identity_index
    free = [g for g in range(len(p.gates)) if g != ident]
    mats = p.matrices[free]
    weights = weights_all[free]
    scan_all = which != "minimize_depth"

    best = None  # (objective, sequence in original indices, phase)
    checked = 1
    hit = _matches(p.matrices[ident][None], targets)[0]
    if hit.any():
        best = (float(weights_all[ident]), (ident,), int(np.argmax(hit)))

    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 and free else None
    try:
        for length in range(1, D + 1):
            if best is not None and not scan_all:
                break
            bound = best[0] if best is not None else math.inf
            scans = [_Scan(mats, weights, targets, length, f, scan_all, bound) for f in range(len(free))]
            results = pool.map(_run_scan, scans) if pool else map(_run_scan, scans)
            for found, n in results:
                checked += n
                # results arrive in first-gate order, so keeping only strict
                # improvements preserves (length, lexicographic) tie-breaking
                if found is not None and (best is None or found[0] < best[0] - 1e-9):
                    best = (found[0], tuple(free[i] for i in found[1]), found[2])
                    if not scan_all:
                        break
    finally:
        if pool:
            pool.shutdown()

    runtime = time.perf_counter() - start
    if best is None:
        return OracleResult("infeasible", None, (), [], None, checked, runtime)
    obj, seq, phase = best
    return OracleResult(
        "optimal", obj, seq, [p.labels[g] for g in seq], p.phase_candidates[phase], checked, runtime
    )


def enumerate_random(
    p: PresolvedProblem,
    time_limit: float,
    seed: int = 0,
    *,
    max_samples: int | None = None,
    batch: int = 4096,
    objective: str | None = None,
) -> RandomSearchResult:
    """Draw gate sequences of length ``maximum_depth`` uniformly (i.i.d. per slot).

    Keeps the lowest-objective exact match (first one on ties) and, for the
    approximate fallback, the draw closest to any phased target in max-norm.
    """
    if not time_limit > 0:
        raise ValueError("time_limit must be positive")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    mats = p.matrices
    weights = p.objective_weights(objective)
    targets = _targets(p)
    G, D, dim = len(mats), p.maximum_depth, mats.shape[1]
    best = None
    best_res, best_res_seq = math.inf, None
    trace = []
    samples = 0
    while time.perf_counter() - start < time_limit:
        n = batch if max_samples is None else min(batch, max_samples - samples)
        if n <= 0:
            break
        draws = rng.integers(0, G, size=(n, D))
        prods = np.broadcast_to(np.eye(dim, dtype=complex), (n, dim, dim))
        for d in range(D):
            prods = prods @ mats[draws[:, d]]
        resid = np.abs(prods[:, None] - targets).max(axis=(-2, -1))  # (n, P)
        r_best = resid.min(axis=1)
        k = int(np.argmin(r_best))
        if r_best[k] < best_res:
            best_res, best_res_seq = float(r_best[k]), tuple(int(g) for g in draws[k])
        hits = np.flatnonzero(r_best <= EPS_FEAS)
        if hits.size:
            costs = weights[draws[hits]].sum(axis=1)
            j = int(np.argmin(costs))
            if best is None or costs[j] < best[0] - 1e-9:
                i = int(hits[j])
                best = (float(costs[j]), tuple(int(g) for g in draws[i]), int(np.argmin(resid[i])))
                trace.append((samples + i, best[0]))
        samples += n
    runtime = time.perf_counter() - start
    if best is None:
        return RandomSearchResult(
            False, None, None, None, None, samples, runtime, trace, best_res, best_res_seq
        )
    obj, seq, phase = best
    return RandomSearchResult(
        True,
        obj,
        seq,
        [p.labels[g] for g in seq],
        p.phase_candidates[phase],
        samples,
        runtime,
        trace,
        best_res,
        best_res_seq,
    )
