"""LP relaxations and branch-and-bound to proven optimality."""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable

import highspy
import numpy as np

from .formulation import MIPModel
from .simplex import SimplexStall, solve_dense

log = logging.getLogger(__name__)

EPS_GAP = 1e-6
EPS_LP = 1e-7
EPS_INT = 1e-6


class LPError(RuntimeError):
    """The LP engine failed to reach a trustworthy status."""


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded
    objective: float
    x: np.ndarray | None
    iterations: int = 0


@dataclass
class BnBNode:
    bound: float
    overrides: dict  # var -> (lb, ub)
    depth: int = 0


@dataclass
class MIPResult:
    status: str  # optimal | infeasible | time_limit
    x: np.ndarray | None
    objective: float
    lower_bound: float
    nodes: int
    wall_time: float
    lp_iterations: int = 0
    bound_history: list = field(default_factory=list)

    @property
    def gap(self) -> float:
        if self.x is None or not math.isfinite(self.objective):
            return math.inf
        return (self.objective - self.lower_bound) / max(1.0, abs(self.objective))


# --------------------------------------------------------------------------
# LP


class HighsLP:
    """A persistent HiGHS dual-simplex LP whose column bounds can be changed in place."""

    def __init__(self, model: MIPModel):
        self.model = model
        h = highspy.Highs()
        for key, value in (
            ("output_flag", False),
            ("solver", "simplex"),
            ("simplex_strategy", 1),
            ("presolve", "off"),
            ("threads", 1),
            ("random_seed", 0),
            ("primal_feasibility_tolerance", EPS_LP),
            ("dual_feasibility_tolerance", EPS_LP),
        ):
            h.setOptionValue(key, value)
        lp = highspy.HighsLp()
        n = model.num_vars
        lo, hi = model.row_bounds()
        csc = model.A.tocsc()
        lp.num_col_ = n
        lp.num_row_ = model.num_rows
        lp.col_cost_ = np.asarray(model.c, dtype=float)
        lp.col_lower_ = model.lb.copy()
        lp.col_upper_ = model.ub.copy()
        lp.row_lower_ = np.where(np.isfinite(lo), lo, -highspy.kHighsInf)
        lp.row_upper_ = np.where(np.isfinite(hi), hi, highspy.kHighsInf)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = csc.indptr.astype(np.int32)
        lp.a_matrix_.index_ = csc.indices.astype(np.int32)
        lp.a_matrix_.value_ = csc.data.astype(float)
        h.passModel(lp)
        self.h = h
        self.lb = model.lb.copy()
        self.ub = model.ub.copy()

    def set_bounds(self, lb: np.ndarray, ub: np.ndarray) -> None:
        changed = np.flatnonzero((lb != self.lb) | (ub != self.ub))
        if changed.size:
            self.h.changeColsBounds(
                len(changed), changed.astype(np.int32), lb[changed].astype(float), ub[changed].astype(float)
            )
            self.lb[changed] = lb[changed]
            self.ub[changed] = ub[changed]

    def solve(self) -> LPResult:
        h = self.h
        h.run()
        status = h.getModelStatus()
        info = h.getInfo()
        iters = int(info.simplex_iteration_count)
        ms = highspy.HighsModelStatus
        if status == ms.kOptimal:
            x = np.array(h.getSolution().col_value)
            return LPResult("optimal", float(info.objective_function_value), x, iters)
        if status == ms.kInfeasible:
            return LPResult("infeasible", math.inf, None, iters)
        if status in (ms.kUnbounded, ms.kUnboundedOrInfeasible):
            # column bounds are finite, so only infeasibility is possible here
            if np.all(np.isfinite(self.lb)) and np.all(np.isfinite(self.ub)):
                return LPResult("infeasible", math.inf, None, iters)
            return LPResult("unbounded", -math.inf, None, iters)
        # a failed warm start is retried once from scratch before giving up
        h.clearSolver()
        h.run()
        status = h.getModelStatus()
        if status == ms.kOptimal:
            x = np.array(h.getSolution().col_value)
            return LPResult("optimal", float(h.getInfo().objective_function_value), x, iters)
        if status == ms.kInfeasible:
            return LPResult("infeasible", math.inf, None, iters)
        raise LPError(f"HiGHS returned {h.modelStatusToString(status)} after {iters} iterations")


def _bounds_with(model: MIPModel, overrides: dict | None):
    lb, ub = model.lb.copy(), model.ub.copy()
    for j, (lo, hi) in (overrides or {}).items():
        lb[j], ub[j] = lo, hi
    return lb, ub


def solve_lp(model: MIPModel, overrides: dict | None = None, backend: str = "highs") -> LPResult:
    """LP relaxation of ``model`` with optional per-variable bound overrides."""
    lb, ub = _bounds_with(model, overrides)
    if np.any(lb > ub):
        return LPResult("infeasible", math.inf, None, 0)
    if backend == "highs":
        lp = HighsLP(model)
        lp.set_bounds(lb, ub)
        return lp.solve()
    if backend == "dense":
        lo, hi = model.row_bounds()
        try:
            status, x, obj, it = solve_dense(model.c, model.A.toarray(), lo, hi, lb, ub)
        except SimplexStall as exc:
            raise LPError(f"dense simplex stalled: {exc}") from exc
        return LPResult(status, obj if status == "optimal" else math.inf, x, it)
    raise ValueError(f"unknown LP backend {backend!r}")


# --------------------------------------------------------------------------
# branch and bound


def _objective_is_integral(model: MIPModel) -> bool:
    c = model.c
    on_cont = c[~model.integer]
    on_int = c[model.integer]
    return bool(np.all(on_cont == 0) and np.all(np.abs(on_int - np.round(on_int)) < 1e-12))


def branch_priority(model: MIPModel, labels: list | None = None) -> np.ndarray:
    """Tie-break rank of each integer variable: depth first, then gate label."""
    rank = np.full(model.num_vars, np.iinfo(np.int64).max, dtype=np.int64)
    if model.vmap is not None:
        z = model.vmap.z
        G, D = z.shape
        order = sorted(range(G), key=lambda g: labels[g]) if labels else list(range(G))
        pos = {g: i for i, g in enumerate(order)}
        for d in range(D):
            for g in range(G):
                rank[z[g, d]] = d * G + pos[g]
    else:
        ints = np.flatnonzero(model.integer)
        rank[ints] = np.arange(len(ints))
    return rank


def pick_branch_variable(x: np.ndarray, integer_ids: np.ndarray, rank: np.ndarray) -> int | None:
    """Most fractional integer variable; ties go to the lowest rank."""
    vals = x[integer_ids]
    frac = np.abs(vals - np.round(vals))
    if frac.max(initial=0.0) <= EPS_INT:
        return None
    best = frac.max()
    ties = integer_ids[frac >= best - 1e-9]
    return int(ties[np.argmin(rank[ties])])


def solve_mip(
    model: MIPModel,
    *,
    time_limit: float = math.inf,
    warm_start: np.ndarray | None = None,
    emphasize_optimality: bool = False,
    node_order: str = "best_bound",
    cutoff: float = math.inf,
    heuristic: Callable[[np.ndarray], np.ndarray | None] | None = None,
    accept: Callable[[np.ndarray], np.ndarray | None] | None = None,
    labels: list | None = None,
    node_limit: int | None = None,
) -> MIPResult:
    """Branch-and-bound over the LP relaxation.

    ``heuristic(lp_x)`` may return a feasible integral assignment; ``accept(lp_x)``
    turns an integral LP point into an exactly verified assignment (or ``None``
    to reject it). ``cutoff`` prunes anything not strictly better than a known
    objective from elsewhere.
    """
    if node_order not in ("best_bound", "depth_first"):
        raise ValueError(f"unknown node_order {node_order!r}")
    start = time.perf_counter()
    if model.infeasible_reason:
        log.info("model declared infeasible before solve: %s", model.infeasible_reason)
        return MIPResult("infeasible", None, math.inf, math.inf, 0, 0.0)

    integral_obj = _objective_is_integral(model)
    integer_ids = np.flatnonzero(model.integer)
    rank = branch_priority(model, labels)
    lp = HighsLP(model)
    counter = itertools.count()

    inc_x: np.ndarray | None = None
    inc_obj = math.inf
    history: list = []
    lp_iters = 0

    def node_bound(value: float) -> float:
        if integral_obj:
            return math.ceil(value - 1e-6)
        return value

    def threshold() -> float:
        return min(inc_obj, cutoff)

    def try_incumbent(x: np.ndarray | None) -> None:
        nonlocal inc_x, inc_obj
        if x is None:
            return
        obj = float(model.c @ x)
        if obj < inc_obj - EPS_GAP and obj < cutoff - EPS_GAP:
            inc_x, inc_obj = x, obj
            history.append((next(counter), obj))
            log.debug("incumbent %.6g", obj)

    if warm_start is not None:
        if model.max_violation(warm_start) <= 1e-6:
            try_incumbent(np.asarray(warm_start, dtype=float))
        else:
            log.warning("warm start violates the model by %.3g; ignored", model.max_violation(warm_start))

    heap: list = []
    stack: list = []
    root = BnBNode(-math.inf, {}, 0)
    if node_order == "depth_first":
        stack.append(root)
    else:
        heapq.heappush(heap, (root.bound, 0, next(counter), root))
    nodes = 0
    lower = -math.inf
    dive: BnBNode | None = None
    status = None

    def open_min() -> float:
        vals = [n.bound for n in stack] + [item[0] for item in heap]
        if dive is not None:
            vals.append(dive.bound)
        return min(vals, default=math.inf)

    while True:
        if dive is not None:
            node, dive = dive, None
        elif stack:
            node = stack.pop()
        elif heap:
            node = heapq.heappop(heap)[-1]
        else:
            break
        if node.bound >= threshold() - EPS_GAP:
            continue
        if time.perf_counter() - start > time_limit or (node_limit is not None and nodes >= node_limit):
            # put it back so the bound accounts for it
            stack.append(node)
            status = "time_limit"
            break
        nodes += 1
        lb, ub = _bounds_with(model, node.overrides)
        lp.set_bounds(lb, ub)
        res = lp.solve()
        lp_iters += res.iterations
        if res.status != "optimal":
            continue
        bound = node_bound(res.objective)
        if nodes == 1:
            lower = max(lower, bound)
        if bound >= threshold() - EPS_GAP:
            continue
        if heuristic is not None:
            try_incumbent(heuristic(res.x))
            if bound >= threshold() - EPS_GAP:
                continue
        j = pick_branch_variable(res.x, integer_ids, rank)
        if j is None:
            x = accept(res.x) if accept is not None else res.x
            if x is None:
                log.warning("integral LP point failed exact verification; node dropped")
            else:
                try_incumbent(x)
            continue
        down = BnBNode(bound, {**node.overrides, j: (lb[j], math.floor(res.x[j]))}, node.depth + 1)
        up = BnBNode(bound, {**node.overrides, j: (math.ceil(res.x[j]), ub[j])}, node.depth + 1)
        if node_order == "depth_first":
            stack.append(down)
            stack.append(up)
        elif not emphasize_optimality and inc_x is None:
            dive = up
            heapq.heappush(heap, (down.bound, -down.depth, next(counter), down))
        else:
            for child in (up, down):
                heapq.heappush(heap, (child.bound, -child.depth, next(counter), child))
        lower = max(lower, min(open_min(), threshold()))
        if lower >= threshold() - EPS_GAP:
            break

    wall = time.perf_counter() - start
    if status == "time_limit":
        lower = max(lower, min(open_min(), threshold()))
        return MIPResult("time_limit", inc_x, inc_obj, lower, nodes, wall, lp_iters, history)
    if inc_x is None:
        return MIPResult("infeasible", None, math.inf, math.inf, nodes, wall, lp_iters, history)
    return MIPResult("optimal", inc_x, inc_obj, inc_obj, nodes, wall, lp_iters, history)


# --------------------------------------------------------------------------
# circuit-specific heuristics

EPS_FEAS = 1e-4


def rounded_sequence(x: np.ndarray, model: MIPModel) -> tuple:
    """Gate index with the largest selection value at each depth."""
    z = model.vmap.z
    return tuple(int(np.argmax(x[z[:, d]])) for d in range(z.shape[1]))


def round_heuristic(lp: LPResult | np.ndarray, model: MIPModel, problem) -> np.ndarray | None:
    """Round each depth to its arg-max gate and keep the result if the exact product matches."""
    from .formulation import assignment_from_sequence

    x = lp.x if isinstance(lp, LPResult) else lp
    if x is None:
        return None
    seq = rounded_sequence(x, model)
    mats = problem.matrices
    prod = np.eye(mats.shape[1], dtype=complex)
    for g in seq:
        prod = prod @ mats[g]
    if np.max(np.abs(prod - model.phase * problem.target.matrix)) > EPS_FEAS:
        return None
    return assignment_from_sequence(model, problem, seq)
