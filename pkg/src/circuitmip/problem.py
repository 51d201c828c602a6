"""Problem documents, validation and presolve."""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from .gates import (
    ALIASES,
    ANGLE_ARITY,
    FAMILIES,
    TWO_QUBIT,
    EPS_UNIT,
    ElementaryGate,
    GateError,
    GateSpec,
    Unitary,
    circuit_unitary,
    discretize,
    embed,
    equiv_up_to_phase,
    is_pattern,
    lift_to_circuit,
    parse_angle,
    parse_label,
)

OBJECTIVES = ("minimize_depth", "minimize_cnot")
DECOMPOSITIONS = ("exact", "approximate")
DEFAULT_PHASES = (1 + 0j, -1 + 0j, 1j, -1j)
ANGLE_KEYS = {"U3": ("theta", "phi", "lambda"), "Rx": ("theta",), "Ry": ("theta",), "Rz": ("theta",)}
_GREEK = {"θ": "theta", "ϕ": "phi", "φ": "phi", "λ": "lambda"}


class ProblemError(ValueError):
    """Invalid problem document; ``line`` points into the source when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None, key=None):
        self.message = message
        self.key = key
        self.line = line
        self.source = source
        where = ""
        if source or line:
            where = f"{source or '<document>'}" + (f":{line}" if line else "") + ": "
        super().__init__(where + message)


# --------------------------------------------------------------------------
# named targets


def _toffoli(c1: int, c2: int, t: int, n: int) -> np.ndarray:
    p1 = np.diag([0.0, 1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    proj = embed(p1, [c1], n) @ embed(p1, [c2], n)
    return np.eye(2**n) - proj + proj @ embed(x, [t], n)


def _fredkin(c: int, a: int, b: int, n: int) -> np.ndarray:
    p0, p1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    swap = lift_to_circuit(GateSpec("Swap", (a, b)), n).matrix
    return embed(p0, [c], n) + embed(p1, [c], n) @ swap


def named_target(name: str, num_qubits: int) -> Unitary:
    """Built-in targets: any gate label (``CZ_1_2``), a bare family (``CZ``), ``Toffoli``, ``Fredkin``."""
    base, _, rest = name.partition("_")
    qs = tuple(int(q) for q in rest.split("_")) if rest else ()
    if base == "Toffoli":
        c1, c2, t = qs or (1, 2, 3)
        return Unitary(_toffoli(c1, c2, t, num_qubits))
    if base == "Fredkin":
        c, a, b = qs or (1, 2, 3)
        return Unitary(_fredkin(c, a, b, num_qubits))
    family = ALIASES.get(name, name)
    if family in FAMILIES and family not in ("Identity", "KronProduct") and family not in ANGLE_ARITY:
        spec = GateSpec(family, (1, 2) if family in TWO_QUBIT else (1,))
    else:
        spec = parse_label(name)
    return lift_to_circuit(spec, num_qubits).lifted


# --------------------------------------------------------------------------
# problem spec


@dataclass
class ProblemSpec:
    num_qubits: int
    maximum_depth: int
    elementary_gates: list  # GateSpec | GatePattern
    target_gate: Unitary
    angle_grids: dict = field(default_factory=dict)  # family -> list of grids
    objective: str = "minimize_depth"
    decomposition_type: str = "exact"
    cnot_lower_bound: int | None = None
    input_circuit: list | None = None
    phase_candidates: tuple = DEFAULT_PHASES
    time_limit: float = 3600.0
    rng_seed: int = 0
    target_label: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        n, d = self.num_qubits, self.maximum_depth
        if not isinstance(n, int) or n < 1:
            raise ProblemError(f"num_qubits must be an integer >= 1, got {n!r}", key="num_qubits")
        if not isinstance(d, int) or d < 2:
            raise ProblemError(f"maximum_depth must be an integer >= 2, got {d!r}", key="maximum_depth")
        if not self.elementary_gates:
            raise ProblemError("elementary_gates is empty", key="elementary_gates")
        for g in self.elementary_gates:
            bad = [q for q in g.qubits if q > n]
            if bad:
                raise ProblemError(f"gate {g.label} uses qubit(s) {bad} beyond num_qubits={n}", key="elementary_gates")
            if is_pattern(g) and g.family not in self.angle_grids:
                raise ProblemError(f"gate {g.label} needs an angle grid for {g.family}", key="angles")
        if self.target_gate.dim != 2**n:
            raise ProblemError(f"target_gate has dimension {self.target_gate.dim}, expected {2**n}", key="target_gate")
        if not self.target_gate.is_unitary():
            raise ProblemError(
                f"target_gate is not unitary (|UU^† - I|_max = {self.target_gate.unitarity_error():.3g})",
                key="target_gate",
            )
        if self.objective not in OBJECTIVES:
            raise ProblemError(f"objective must be one of {OBJECTIVES}, got {self.objective!r}", key="objective")
        if self.decomposition_type not in DECOMPOSITIONS:
            raise ProblemError(
                f"decomposition_type must be one of {DECOMPOSITIONS}, got {self.decomposition_type!r}",
                key="decomposition_type",
            )
        if self.cnot_lower_bound is not None and (
            not isinstance(self.cnot_lower_bound, int) or self.cnot_lower_bound < 0
        ):
            raise ProblemError("set_cnot_lower_bound must be a nonnegative integer", key="set_cnot_lower_bound")
        if not self.phase_candidates:
            raise ProblemError("phase_candidates is empty", key="phase_candidates")
        for c in self.phase_candidates:
            if abs(abs(c) - 1) > EPS_UNIT:
                raise ProblemError(f"phase candidate {c} is not unit-modulus", key="phase_candidates")
        if not self.time_limit > 0:
            raise ProblemError("time_limit must be positive", key="time_limit")


def _line_index(node, path=()) -> dict:
    """Map key paths in a composed YAML tree to 1-based line numbers."""
    out = {path: node.start_mark.line + 1}
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            out.update(_line_index(v, path + (k.value,)))
            out[path + (k.value,)] = k.start_mark.line + 1
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            out.update(_line_index(v, path + (i,)))
    return out


def _parse_complex(item) -> complex:
    if isinstance(item, (list, tuple)) and len(item) == 2:
        return complex(float(item[0]), float(item[1]))
    if isinstance(item, (int, float)):
        return complex(item)
    raise ValueError(f"expected [re, im], got {item!r}")


def _parse_grids(family: str, raw) -> list[list[float]]:
    keys = ANGLE_KEYS[family]
    if isinstance(raw, dict):
        raw = {_GREEK.get(k, k): v for k, v in raw.items()}
        missing = [k for k in keys if k not in raw]
        if missing:
            raise ValueError(f"angle grid for {family} is missing {missing}")
        grids = [raw[k] for k in keys]
    elif len(keys) == 1 and isinstance(raw, list):
        grids = [raw]
    else:
        raise ValueError(f"angle grid for {family} must map {list(keys)} to lists")
    out = []
    for g in grids:
        if not isinstance(g, list) or not g:
            raise ValueError(f"empty angle grid for {family}")
        out.append([parse_angle(a) for a in g])
    return out


def _rejoin_labels(items) -> list[str]:
    """Undo YAML flow-list splitting of unquoted labels such as ``[U3_1(pi/2,0,pi)]``."""
    out: list[str] = []
    pending = None
    for item in items:
        text = str(item).strip()
        pending = text if pending is None else f"{pending},{text}"
        if pending.count("(") <= pending.count(")"):
            out.append(pending)
            pending = None
    if pending is not None:
        out.append(pending)
    return out


def parse_spec(document: str | dict, source: str | None = None) -> ProblemSpec:
    """Build a :class:`ProblemSpec` from YAML/JSON text (or an already-loaded mapping)."""
    lines: dict = {}
    if isinstance(document, str):
        try:
            lines = _line_index(yaml.compose(document)) if document.strip() else {}
            data = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise ProblemError(f"malformed document: {exc}", mark.line + 1 if mark else None, source)
    else:
        data = document
    if not isinstance(data, dict):
        raise ProblemError("document must be a mapping of options", 1, source)

    def fail(msg, *path):
        line = lines.get(tuple(path)) or lines.get(tuple(path[:1]))
        raise ProblemError(msg, line, source, path[0] if path else None)

    for key in ("num_qubits", "maximum_depth", "elementary_gates", "target_gate"):
        if key not in data:
            fail(f"missing required key {key!r}")
    n = data["num_qubits"]

    grids = {}
    for fam, raw in (data.get("angles") or {}).items():
        if fam not in ANGLE_KEYS:
            fail(f"no angle parameters for gate family {fam!r}", "angles", fam)
        try:
            grids[fam] = _parse_grids(fam, raw)
        except (ValueError, GateError) as exc:
            fail(str(exc), "angles", fam)

    gates = []
    for i, label in enumerate(_rejoin_labels(data["elementary_gates"] or [])):
        try:
            gates.append(parse_label(str(label), allow_missing_angles=True))
        except GateError as exc:
            fail(str(exc), "elementary_gates", i)

    raw_target = data["target_gate"]
    target_label = None
    try:
        if isinstance(raw_target, str):
            target_label = raw_target
            target = named_target(raw_target, n)
        else:
            rows = raw_target["matrix"] if isinstance(raw_target, dict) else raw_target
            target = Unitary(np.array([[_parse_complex(x) for x in row] for row in rows]))
    except (GateError, ValueError, TypeError, KeyError) as exc:
        fail(f"bad target_gate: {exc}", "target_gate")

    circuit = None
    if data.get("input_circuit") is not None:
        circuit = []
        for i, label in enumerate(_rejoin_labels(data["input_circuit"])):
            try:
                circuit.append(parse_label(str(label)))
            except GateError as exc:
                fail(str(exc), "input_circuit", i)

    phases = DEFAULT_PHASES
    if data.get("phase_candidates") is not None:
        try:
            phases = tuple(_parse_complex(c) for c in data["phase_candidates"])
        except (ValueError, TypeError) as exc:
            fail(str(exc), "phase_candidates")

    try:
        return ProblemSpec(
            num_qubits=n,
            maximum_depth=data["maximum_depth"],
            elementary_gates=gates,
            target_gate=target,
            angle_grids=grids,
            objective=data.get("objective", "minimize_depth"),
            decomposition_type=data.get("decomposition_type", "exact"),
            cnot_lower_bound=data.get("set_cnot_lower_bound"),
            input_circuit=circuit,
            phase_candidates=phases,
            time_limit=float(data.get("time_limit", 3600.0)),
            rng_seed=int(data.get("rng_seed", 0)),
            target_label=target_label,
        )
    except ProblemError as exc:
        # a missing angles block is reported at the gate list that needs it
        line = lines.get((exc.key,)) or lines.get(("elementary_gates",) if exc.key == "angles" else ())
        raise ProblemError(exc.message, line, source, exc.key) from None


def load_spec(path: str | Path) -> ProblemSpec:
    path = Path(path)
    return parse_spec(path.read_text(encoding="utf-8"), source=str(path))


# --------------------------------------------------------------------------
# presolve


@dataclass(frozen=True)
class PairTable:
    """Algebraic relations between native gates, indexed by gate position."""

    commute: np.ndarray  # (G, G) bool
    redundant: np.ndarray  # (G, G) int, index of W with U_i U_j = c W, else -1
    redundant_phase: np.ndarray  # (G, G) complex
    involutory: np.ndarray  # (G,) bool
    idempotent: np.ndarray  # (G,) bool
    square_phase: np.ndarray  # (G,) complex, U^2 = c I when involutory


def pair_table(mats: np.ndarray, tol: float = EPS_UNIT) -> PairTable:
    """Vectorised :func:`classify_pair` / :func:`classify_single` over all gate pairs."""
    g, dim = mats.shape[0], mats.shape[1]
    prod = np.einsum("iab,jbc->ijac", mats, mats)
    commute = np.max(np.abs(prod - prod.transpose(1, 0, 2, 3)), axis=(2, 3)) < tol
    # overlap <W_k, U_i U_j> / dim has modulus 1 iff U_i U_j = c W_k
    overlap = np.einsum("kab,ijab->ijk", mats.conj(), prod) / dim
    redundant = np.full((g, g), -1)
    phase = np.zeros((g, g), dtype=complex)
    hits = np.argwhere(np.abs(np.abs(overlap) - 1) < tol)
    for i, j, k in hits:
        if redundant[i, j] >= 0:
            continue
        c = overlap[i, j, k]
        if np.max(np.abs(prod[i, j] - c * mats[k])) < tol:
            redundant[i, j], phase[i, j] = k, c
    eye = np.eye(dim)
    sq = prod[np.arange(g), np.arange(g)]
    sq_phase = sq[:, 0, 0].copy()
    involutory = np.array(
        [abs(abs(c) - 1) < tol and np.max(np.abs(s - c * eye)) < tol for s, c in zip(sq, sq_phase)],
        dtype=bool,
    )
    idempotent = np.max(np.abs(sq - mats), axis=(1, 2)) < tol
    return PairTable(commute, redundant, phase, involutory, idempotent, np.where(involutory, sq_phase, 0))


def phase_group_contains(phases: Sequence[complex], c: complex, tol: float = EPS_UNIT) -> bool:
    """Is the candidate set invariant under multiplication by ``c``?"""
    return all(any(abs(c * p - q) < tol for q in phases) for p in phases)


def close_phases(phases: Sequence[complex], ratios: Sequence[complex], limit: int = 64) -> tuple:
    """Smallest superset of ``phases`` closed under multiplication by ``ratios``."""
    out = list(phases)
    frontier = list(phases)
    while frontier:
        nxt = []
        for p in frontier:
            for r in ratios:
                q = p * r
                if not any(abs(q - x) < EPS_UNIT for x in out):
                    out.append(q)
                    nxt.append(q)
        if len(out) > limit:
            warnings.warn(
                f"phase candidate closure exceeded {limit} values; keeping the first {limit}",
                stacklevel=3,
            )
            return tuple(out[:limit])
        frontier = nxt
    return tuple(out)


@dataclass
class PresolvedProblem:
    num_qubits: int
    maximum_depth: int
    gates: list  # ElementaryGate, Identity last
    target: Unitary
    objective: str
    decomposition_type: str
    phase_candidates: tuple
    all_real: bool
    pair_flags: PairTable
    cnot_lower_bound: int | None = None
    warm_start: tuple | None = None  # gate index per depth
    emphasize_optimality: bool = False
    time_limit: float = 3600.0
    rng_seed: int = 0
    target_label: str | None = None

    @property
    def identity_index(self) -> int:
        return len(self.gates) - 1

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.gates]

    @property
    def matrices(self) -> np.ndarray:
        return np.stack([g.matrix for g in self.gates])

    def cnot_weights(self) -> np.ndarray:
        return np.array([g.spec.cnot_count for g in self.gates])

    def objective_weights(self, which: str | None = None) -> np.ndarray:
        which = which or self.objective
        if which == "minimize_depth":
            w = np.ones(len(self.gates))
            w[self.identity_index] = 0
            return w
        if which == "minimize_cnot":
            return self.cnot_weights().astype(float)
        raise ValueError(f"unknown objective {which!r}")

    def as_spec(self) -> ProblemSpec:
        return ProblemSpec(
            num_qubits=self.num_qubits,
            maximum_depth=self.maximum_depth,
            elementary_gates=[g.spec for g in self.gates],
            target_gate=self.target,
            objective=self.objective,
            decomposition_type=self.decomposition_type,
            cnot_lower_bound=self.cnot_lower_bound,
            phase_candidates=self.phase_candidates,
            time_limit=self.time_limit,
            rng_seed=self.rng_seed,
            target_label=self.target_label,
        )

    def with_options(self, **changes) -> "PresolvedProblem":
        return dataclasses.replace(self, **changes)


def expand_gates(spec: ProblemSpec) -> list[GateSpec]:
    out = []
    for g in spec.elementary_gates:
        if is_pattern(g):
            out.extend(discretize(g.family, spec.angle_grids[g.family], [g.qubits]))
        else:
            out.append(g)
    return out


def _match_native(gate: ElementaryGate, natives: Sequence[ElementaryGate]):
    for k, w in enumerate(natives):
        ok, c = equiv_up_to_phase(gate.matrix, w.matrix)
        if ok:
            return k, c
    return None, None


def presolve(spec: ProblemSpec, dedup: str = "phase") -> PresolvedProblem:
    """Expand angle grids, drop duplicate gates, detect real data, map the warm start.

    ``dedup="phase"`` removes gates equal up to a global phase (phase candidates are
    then closed under the removed ratios); ``dedup="exact"`` removes only identical
    matrices.
    """
    if dedup not in ("phase", "exact"):
        raise ValueError(f"dedup must be 'phase' or 'exact', got {dedup!r}")
    n = spec.num_qubits
    lifted = [lift_to_circuit(g, n) for g in expand_gates(spec)]
    identity = lift_to_circuit(GateSpec("Identity"), n)

    kept: list[ElementaryGate] = []
    ratios: list[complex] = []
    for g in lifted:
        if g.is_identity:
            continue
        ok, c = equiv_up_to_phase(g.matrix, identity.matrix)
        if ok and (dedup == "phase" or abs(c - 1) < EPS_UNIT):
            ratios.append(c)
            continue
        dup = False
        for k in kept:
            ok, c = equiv_up_to_phase(g.matrix, k.matrix)
            if ok and (dedup == "phase" or abs(c - 1) < EPS_UNIT):
                ratios.append(c)
                dup = True
                break
        if not dup:
            kept.append(g)
    gates = kept + [identity]

    mats = np.stack([g.matrix for g in gates])
    all_real = bool(np.max(np.abs(mats.imag)) < EPS_UNIT and spec.target_gate.is_real())

    phases = tuple(complex(c) for c in spec.phase_candidates)
    nontrivial = [r for r in ratios if abs(r - 1) > EPS_UNIT]
    if nontrivial:
        phases = close_phases(phases, [r.conjugate() for r in nontrivial])
    if all_real:
        real = tuple(p for p in phases if abs(p.imag) < EPS_UNIT)
        if real:
            phases = tuple(complex(p.real, 0.0) for p in real)
        else:
            all_real = False

    problem = PresolvedProblem(
        num_qubits=n,
        maximum_depth=spec.maximum_depth,
        gates=gates,
        target=spec.target_gate,
        objective=spec.objective,
        decomposition_type=spec.decomposition_type,
        phase_candidates=phases,
        all_real=all_real,
        pair_flags=pair_table(mats),
        cnot_lower_bound=spec.cnot_lower_bound,
        time_limit=spec.time_limit,
        rng_seed=spec.rng_seed,
        target_label=spec.target_label,
    )

    if spec.input_circuit:
        ws = warm_start_indices(problem, spec.input_circuit)
        if ws is not None:
            problem.warm_start = ws
            problem.emphasize_optimality = True
    return problem


def warm_start_indices(problem: PresolvedProblem, circuit: Sequence[GateSpec]) -> tuple | None:
    """Map a user circuit onto native indices per depth, or ``None`` (with a warning)."""
    n, depth = problem.num_qubits, problem.maximum_depth
    try:
        lifted = [lift_to_circuit(g, n) for g in circuit]
    except GateError as exc:
        warnings.warn(f"input_circuit rejected: {exc}", stacklevel=3)
        return None
    lifted = [g for g in lifted if not g.is_identity]
    if len(lifted) > depth:
        warnings.warn(
            f"input_circuit rejected: {len(lifted)} gates exceed maximum_depth={depth}", stacklevel=3
        )
        return None
    idx = []
    for g in lifted:
        k, _ = _match_native(g, problem.gates)
        if k is None:
            warnings.warn(f"input_circuit rejected: {g.label} is not a native gate", stacklevel=3)
            return None
        idx.append(k)
    product = circuit_unitary([problem.gates[k] for k in idx], n)
    if not any(
        np.max(np.abs(product - c * problem.target.matrix)) < 1e-4 for c in problem.phase_candidates
    ):
        warnings.warn("input_circuit rejected: its product does not match the target", stacklevel=3)
        return None
    return tuple(idx) + (problem.identity_index,) * (depth - len(idx))
