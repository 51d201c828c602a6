"""Dense bounded-variable primal simplex.

Small and slow; used for tiny models and as an independent check on the
HiGHS backend. Rows ``row_lo <= A x <= row_hi`` become ``A x - s = 0`` with the
slack ``s`` carrying the row bounds, so every variable is a bounded variable.
"""

from __future__ import annotations

import numpy as np

DEGENERATE_STREAK = 50


class SimplexStall(RuntimeError):
    pass


def _initial_value(lo: float, hi: float) -> float:
    if np.isfinite(lo):
        return lo
    if np.isfinite(hi):
        return hi
    return 0.0


def _iterate(A, cost, lo, hi, x, basis, tol, max_iter, start_iter):
    """Run simplex pivots in place. Returns (status, iterations)."""
    m, ntot = A.shape
    it = start_iter
    degenerate = 0
    bland = False
    is_basic = np.zeros(ntot, dtype=bool)
    is_basic[basis] = True
    while True:
        if it - start_iter > max_iter:
            raise SimplexStall(f"no convergence after {max_iter} pivots (bland={bland})")
        B = A[:, basis]
        try:
            y = np.linalg.solve(B.T, cost[basis])
        except np.linalg.LinAlgError as exc:
            raise SimplexStall(f"singular basis at pivot {it}") from exc
        d = cost - A.T @ y
        d[is_basic] = 0.0
        at_lo = np.isclose(x, lo, atol=tol) & ~is_basic
        at_hi = np.isclose(x, hi, atol=tol) & ~is_basic
        free = ~is_basic & ~at_lo & ~at_hi
        up = (d < -tol) & (~at_hi | at_lo) & ~is_basic
        down = (d > tol) & (~at_lo | at_hi) & ~is_basic
        # a fixed variable (lo == hi) is both at_lo and at_hi; it may not move
        fixed = np.isclose(lo, hi, atol=tol)
        up &= ~fixed
        down &= ~fixed
        up |= free & (d < -tol)
        down |= free & (d > tol)
        cand = np.flatnonzero(up | down)
        if cand.size == 0:
            return "optimal", it
        j = int(cand[0]) if bland else int(cand[np.argmax(np.abs(d[cand]))])
        delta = 1.0 if up[j] else -1.0
        alpha = np.linalg.solve(B, A[:, j])
        rate = -delta * alpha  # change of basic vars per unit step
        xb = x[basis]
        lb, ub = lo[basis], hi[basis]
        with np.errstate(divide="ignore", invalid="ignore"):
            steps = np.where(
                rate < -tol, (xb - lb) / -rate, np.where(rate > tol, (ub - xb) / rate, np.inf)
            )
        steps = np.where(np.isnan(steps), np.inf, np.maximum(steps, 0.0))
        own = hi[j] - lo[j]
        t_basic = steps.min() if steps.size else np.inf
        t = min(t_basic, own)
        if not np.isfinite(t):
            return "unbounded", it
        it += 1
        degenerate = degenerate + 1 if t < 1e-12 else 0
        if degenerate > DEGENERATE_STREAK:
            bland = True
        x[basis] = xb + t * rate
        x[j] += delta * t
        if own <= t_basic:
            x[j] = hi[j] if delta > 0 else lo[j]
            continue
        ties = np.flatnonzero(steps <= t_basic + 1e-12)
        r = int(ties[np.argmin(basis[ties])]) if bland else int(ties[np.argmax(np.abs(rate[ties]))])
        leaving = basis[r]
        x[leaving] = lo[leaving] if rate[r] < 0 else hi[leaving]
        is_basic[leaving] = False
        is_basic[j] = True
        basis[r] = j


def solve_dense(c, A, row_lo, row_hi, lb, ub, tol=1e-9, max_iter=20000):
    """Minimize ``c x`` subject to bounded rows and bounded columns.

    Returns ``(status, x, objective, iterations)`` with status in
    ``optimal | infeasible | unbounded``.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    c = np.asarray(c, dtype=float)
    lo = np.concatenate([np.asarray(lb, float), np.asarray(row_lo, float)])
    hi = np.concatenate([np.asarray(ub, float), np.asarray(row_hi, float)])
    if np.any(lo > hi + tol):
        return "infeasible", None, np.nan, 0
    full = np.hstack([A, -np.eye(m)])
    x = np.array([_initial_value(a, b) for a, b in zip(lo, hi)])
    resid = -(full @ x)
    sign = np.where(resid >= 0, 1.0, -1.0)
    art = np.diag(sign)
    A1 = np.hstack([full, art])
    lo1 = np.concatenate([lo, np.zeros(m)])
    hi1 = np.concatenate([hi, np.full(m, np.inf)])
    x1 = np.concatenate([x, np.abs(resid)])
    basis = np.arange(n + m, n + 2 * m)
    cost1 = np.concatenate([np.zeros(n + m), np.ones(m)])
    status, it = _iterate(A1, cost1, lo1, hi1, x1, basis, tol, max_iter, 0)
    if status != "optimal":
        raise SimplexStall(f"phase one ended with status {status}")
    infeas = x1[n + m:].sum()
    if infeas > 1e-7 * max(1.0, np.abs(A).max(initial=1.0)):
        return "infeasible", None, np.nan, it
    hi1[n + m:] = 0.0
    x1[n + m:] = np.clip(x1[n + m:], 0.0, 0.0)
    cost2 = np.concatenate([c, np.zeros(2 * m)])
    status, it = _iterate(A1, cost2, lo1, hi1, x1, basis, tol, max_iter, it)
    if status == "unbounded":
        return "unbounded", None, -np.inf, it
    xs = x1[:n]
    return "optimal", xs, float(c @ xs), it
