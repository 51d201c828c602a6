"""MIP model of the decomposition problem.

Variables
    ``z[g, d]``      binary, gate ``g`` occupies depth ``d`` (1-based depths)
    ``X[d][r, c, p]`` continuous in [-1, 1], part ``p`` of entry ``(r, c)`` of the
                     running product ``G_1 ... G_d`` for ``d = 1 .. D-1``
    ``w[d][r, k, p, g]`` continuous in [-1, 1], linearizes ``X[d-1][r, k, p] * z[g, d]``

Rows
    ``sel:d``        one gate per depth
    ``prod``         ``X[1] = G_1`` (identity start), ``X[d] = X[d-1] G_d``, ``X[D-1] G_D = c T``
    ``mc``           the four McCormick inequalities per auxiliary
    ``cut``          symmetry-breaking pair inequalities
    ``cnotlb``       optional CNOT lower bound
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .problem import PresolvedProblem, phase_group_contains

PARTS = ("re", "im")
ZERO_TOL = 1e-12


class FormulationError(ValueError):
    pass


@dataclass
class VariableMap:
    z: np.ndarray  # (G, D) variable ids
    ghat: dict = field(default_factory=dict)  # d -> (dim, dim, P) ids
    aux: dict = field(default_factory=dict)  # d -> (dim, dim, P, G) ids, -1 if absent
    parts: tuple = PARTS

    @property
    def binaries(self) -> np.ndarray:
        return self.z.ravel()


@dataclass(frozen=True)
class Row:
    cols: tuple
    coefs: tuple
    sense: str  # "<", "=", ">"
    rhs: float
    name: str


@dataclass
class MIPModel:
    names: list
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    A: sp.csr_matrix
    sense: np.ndarray
    rhs: np.ndarray
    row_names: list
    c: np.ndarray
    vmap: VariableMap | None = None
    phase: complex = 1 + 0j
    infeasible_reason: str | None = None
    name: str = "circuit"

    @property
    def num_vars(self) -> int:
        return len(self.names)

    @property
    def num_rows(self) -> int:
        return len(self.row_names)

    def row_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lo = np.where(self.sense == "<", -np.inf, self.rhs)
        hi = np.where(self.sense == ">", np.inf, self.rhs)
        return lo, hi

    def rows(self, prefix: str = ""):
        """Iterate rows as :class:`Row` (slow; for inspection and tests)."""
        A = self.A.tocsr()
        for i, name in enumerate(self.row_names):
            if not name.startswith(prefix):
                continue
            sl = slice(A.indptr[i], A.indptr[i + 1])
            yield Row(tuple(A.indices[sl]), tuple(A.data[sl]), self.sense[i], self.rhs[i], name)

    def max_violation(self, x: np.ndarray) -> float:
        ax = self.A @ x
        lo, hi = self.row_bounds()
        viol = np.maximum(np.maximum(lo - ax, ax - hi), 0.0)
        bnd = np.maximum(np.maximum(self.lb - x, x - self.ub), 0.0)
        return float(max(viol.max(initial=0.0), bnd.max(initial=0.0)))


class ModelBuilder:
    """Accumulates variables and sparse rows, then freezes into a :class:`MIPModel`."""

    def __init__(self):
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.integer: list[bool] = []
        self._rows_i: list[np.ndarray] = []
        self._rows_j: list[np.ndarray] = []
        self._rows_v: list[np.ndarray] = []
        self.sense: list[str] = []
        self.rhs: list[float] = []
        self.row_names: list[str] = []

    def add_var(self, name: str, lb: float, ub: float, integer: bool = False) -> int:
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        self.integer.append(integer)
        return len(self.names) - 1

    def add_row(self, cols, coefs, sense: str, rhs: float, name: str) -> int:
        i = len(self.row_names)
        cols = np.asarray(cols, dtype=np.int64)
        self._rows_i.append(np.full(len(cols), i, dtype=np.int64))
        self._rows_j.append(cols)
        self._rows_v.append(np.asarray(coefs, dtype=float))
        self.sense.append(sense)
        self.rhs.append(float(rhs))
        self.row_names.append(name)
        return i

    def build(self, c=None, **kw) -> MIPModel:
        n, m = len(self.names), len(self.row_names)
        if m:
            A = sp.csr_matrix(
                (np.concatenate(self._rows_v), (np.concatenate(self._rows_i), np.concatenate(self._rows_j))),
                shape=(m, n),
            )
        else:
            A = sp.csr_matrix((0, n))
        A.sum_duplicates()
        return MIPModel(
            names=list(self.names),
            lb=np.array(self.lb, dtype=float),
            ub=np.array(self.ub, dtype=float),
            integer=np.array(self.integer, dtype=bool),
            A=A,
            sense=np.array(self.sense, dtype="<U1"),
            rhs=np.array(self.rhs, dtype=float),
            row_names=list(self.row_names),
            c=np.zeros(n) if c is None else np.asarray(c, dtype=float),
            **kw,
        )


def _ascii(label: str) -> str:
    return label.replace("⊗", "(x)")


def order_key(p: PresolvedProblem, g: int) -> tuple:
    """Canonical gate order for symmetry breaking: Identity last, then by label."""
    return (p.gates[g].is_identity, p.gates[g].label)


# --------------------------------------------------------------------------
# building blocks


def allocate_selection(b: ModelBuilder, p: PresolvedProblem) -> np.ndarray:
    G, D = len(p.gates), p.maximum_depth
    z = np.empty((G, D), dtype=np.int64)
    for d in range(D):
        for g, gate in enumerate(p.gates):
            z[g, d] = b.add_var(f"z{g}:{_ascii(gate.label)}:d{d + 1}", 0.0, 1.0, integer=True)
    return z


def build_selection_constraints(b: ModelBuilder, p: PresolvedProblem, z: np.ndarray) -> list[int]:
    if len(p.gates) == 0:
        raise FormulationError("no native gates")
    G = len(p.gates)
    return [
        b.add_row(z[:, d], np.ones(G), "=", 1.0, f"sel:d{d + 1}") for d in range(p.maximum_depth)
    ]


def build_product_chain(b: ModelBuilder, p: PresolvedProblem, z: np.ndarray, target: np.ndarray, vmap: VariableMap):
    """Rows tying the running product to the selected gates and the (phased) target."""
    D, dim = p.maximum_depth, 2**p.num_qubits
    parts = ("re",) if p.all_real else PARTS
    P = len(parts)
    mats = p.matrices
    M = {"re": mats.real, "im": mats.imag}
    G = len(p.gates)

    def part(a, name):
        return a.real if name == "re" else a.imag

    # depth 1: X1 = G_1 (identity initial product)
    x1 = np.empty((dim, dim, P), dtype=np.int64)
    for r in range(dim):
        for c in range(dim):
            for pi, pn in enumerate(parts):
                x1[r, c, pi] = b.add_var(f"X1[{r},{c}].{pn}", -1.0, 1.0)
                coef = part(mats[:, r, c], pn)
                nz = np.abs(coef) > ZERO_TOL
                b.add_row(
                    np.concatenate([[x1[r, c, pi]], z[nz, 0]]),
                    np.concatenate([[1.0], -coef[nz]]),
                    "=",
                    0.0,
                    f"prod:d1[{r},{c}].{pn}",
                )
    vmap.ghat[1] = x1

    # which (k, g) pairs appear: gate g has a nonzero in row k
    used = np.abs(mats).max(axis=2) > ZERO_TOL  # (G, dim)

    prev = x1
    for d in range(2, D + 1):
        terminal = d == D
        aux = np.full((dim, dim, P, G), -1, dtype=np.int64)
        for r in range(dim):
            for k in range(dim):
                for pi, pn in enumerate(parts):
                    x = prev[r, k, pi]
                    for g in np.flatnonzero(used[:, k]):
                        zz = z[g, d - 1]
                        w = b.add_var(f"w{d}[{r},{k}].{pn}*g{g}", -1.0, 1.0)
                        aux[r, k, pi, g] = w
                        tag = f"mc:d{d}[{r},{k}].{pn}*g{g}"
                        b.add_row([w, zz], [1.0, 1.0], ">", 0.0, tag + ":a")
                        b.add_row([w, zz], [1.0, -1.0], "<", 0.0, tag + ":b")
                        b.add_row([w, x, zz], [1.0, -1.0, -1.0], ">", -1.0, tag + ":c")
                        b.add_row([w, x, zz], [1.0, -1.0, 1.0], "<", 1.0, tag + ":d")
        vmap.aux[d] = aux

        if not terminal:
            cur = np.empty((dim, dim, P), dtype=np.int64)
        for r in range(dim):
            for c in range(dim):
                for pi, pn in enumerate(parts):
                    cols, coefs = [], []
                    for k in range(dim):
                        for g in np.flatnonzero(used[:, k]):
                            mre, mim = M["re"][g, k, c], M["im"][g, k, c]
                            if pn == "re":
                                terms = ((0, mre), (1, -mim))
                            else:
                                terms = ((0, mim), (1, mre))
                            for src, coef in terms:
                                if src >= P or abs(coef) <= ZERO_TOL:
                                    continue
                                cols.append(aux[r, k, src, g])
                                coefs.append(coef)
                    name = f"prod:d{d}[{r},{c}].{pn}"
                    if terminal:
                        b.add_row(cols, coefs, "=", part(target[r, c], pn), name)
                    else:
                        xv = b.add_var(f"X{d}[{r},{c}].{pn}", -1.0, 1.0)
                        cur[r, c, pi] = xv
                        b.add_row([xv] + cols, [-1.0] + coefs, "=", 0.0, name)
        if not terminal:
            vmap.ghat[d] = cur
            prev = cur
    vmap.parts = parts


def build_objective(p: PresolvedProblem, z: np.ndarray, num_vars: int, which: str | None = None) -> np.ndarray:
    which = which or p.objective
    weights = p.objective_weights(which)
    if which == "minimize_cnot" and not weights.any():
        raise FormulationError("minimize_cnot requested but no CNOT-class gate is native")
    c = np.zeros(num_vars)
    for d in range(p.maximum_depth):
        c[z[:, d]] = weights
    return c


def valid_inequality_pairs(p: PresolvedProblem) -> list[tuple[int, int, str]]:
    """Ordered gate pairs ``(a, b)`` that may not appear at depths ``(d, d+1)``."""
    flags = p.pair_flags
    G = len(p.gates)
    ident = p.identity_index
    weights = p.objective_weights()
    phases = p.phase_candidates
    keys = [order_key(p, g) for g in range(G)]
    out: dict[tuple[int, int], str] = {}

    for i in range(G):
        for j in range(G):
            if i != j and flags.commute[i, j] and keys[i] < keys[j]:
                out.setdefault((j, i), "commute")
    for g in range(G):
        if g == ident:
            continue
        if flags.involutory[g] and phase_group_contains(phases, flags.square_phase[g]):
            out.setdefault((g, g), "involutory")
        if flags.idempotent[g]:
            out.setdefault((g, g), "idempotent")
    for i in range(G):
        for j in range(G):
            k = flags.redundant[i, j]
            if i == ident or j == ident or k < 0:
                continue
            if weights[k] > weights[i] + weights[j] + 1e-9:
                continue
            if not phase_group_contains(phases, flags.redundant_phase[i, j]):
                continue
            out.setdefault((i, j), "redundant")
    return sorted((a, b, kind) for (a, b), kind in out.items())


def add_valid_inequalities(b: ModelBuilder, p: PresolvedProblem, z: np.ndarray) -> int:
    count = 0
    for a, c, kind in valid_inequality_pairs(p):
        for d in range(p.maximum_depth - 1):
            b.add_row([z[a, d], z[c, d + 1]], [1.0, 1.0], "<", 1.0, f"cut:{kind}:g{a}>g{c}:d{d + 1}")
            count += 1
    return count


def add_cnot_bound(b: ModelBuilder, p: PresolvedProblem, z: np.ndarray, bound: int) -> str | None:
    """Add the CNOT lower-bound row; returns an infeasibility reason if it cannot hold."""
    if bound < 0:
        raise FormulationError("CNOT lower bound must be nonnegative")
    if bound == 0:
        return None
    if bound > p.maximum_depth:
        return f"CNOT lower bound {bound} exceeds maximum_depth {p.maximum_depth}"
    w = p.cnot_weights()
    if not w.any():
        return f"CNOT lower bound {bound} with no CNOT-class native gate"
    cols = [z[g, d] for d in range(p.maximum_depth) for g in np.flatnonzero(w)]
    coefs = [w[g] for d in range(p.maximum_depth) for g in np.flatnonzero(w)]
    b.add_row(cols, coefs, ">", float(bound), "cnotlb")
    return None


def build_model(
    p: PresolvedProblem,
    phase: complex = 1 + 0j,
    *,
    valid_inequalities: bool = True,
    objective: str | None = None,
) -> MIPModel:
    """Full MIP for target ``phase * T``."""
    target = phase * p.target.matrix
    if p.all_real and abs(np.asarray(target).imag).max() > 1e-9:
        raise FormulationError(f"phase {phase} makes the target complex in a real-only model")
    b = ModelBuilder()
    z = allocate_selection(b, p)
    vmap = VariableMap(z=z)
    build_selection_constraints(b, p, z)
    build_product_chain(b, p, z, target, vmap)
    if valid_inequalities:
        add_valid_inequalities(b, p, z)
    reason = None
    if p.cnot_lower_bound:
        reason = add_cnot_bound(b, p, z, p.cnot_lower_bound)
    c = build_objective(p, z, len(b.names), objective)
    return b.build(c=c, vmap=vmap, phase=complex(phase), infeasible_reason=reason)


def assignment_from_sequence(model: MIPModel, p: PresolvedProblem, seq) -> np.ndarray:
    """Full variable vector for a gate-index sequence of length D (exact products)."""
    vm = model.vmap
    x = np.zeros(model.num_vars)
    D = p.maximum_depth
    for d, g in enumerate(seq):
        x[vm.z[g, d]] = 1.0
    mats = p.matrices
    prod = np.eye(2**p.num_qubits, dtype=complex)
    for d in range(1, D + 1):
        if d >= 2:
            aux = vm.aux[d]
            g = seq[d - 1]
            for pi, pn in enumerate(vm.parts):
                val = prod.real if pn == "re" else prod.imag
                ids = aux[:, :, pi, g]
                mask = ids >= 0
                x[ids[mask]] = val[mask]
        prod = prod @ mats[seq[d - 1]]
        if d <= D - 1:
            for pi, pn in enumerate(vm.parts):
                x[vm.ghat[d][:, :, pi]] = prod.real if pn == "re" else prod.imag
    return x
