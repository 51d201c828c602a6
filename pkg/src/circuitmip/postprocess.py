"""From solver assignments to verified circuits, compressed depth and result records."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .formulation import MIPModel
from .gates import CONTROLLED, ElementaryGate, GateSpec, Unitary, format_angle, lift_to_circuit
from .problem import PresolvedProblem

EPS_FEAS = 1e-4
EPS_INT = 1e-6
RESULT_VERSION = 1


@dataclass
class Decomposition:
    circuit: list  # GateSpec, Identity slots dropped
    objective: float | None = None
    cnot_count: int = 0
    depth: int = 0
    compressed_depth: int = 0
    phase: complex | None = None
    status: str = "unknown"
    gap: float | None = None
    lower_bound: float | None = None
    runtime: float = 0.0
    nodes: int = 0
    residual: float | None = None
    source: str = "mip"
    num_qubits: int = 0
    target_label: str | None = None
    details: dict = field(default_factory=dict)

    @property
    def labels(self) -> list[str]:
        return [g.label for g in self.circuit]


def selected_indices(assignment: np.ndarray, model: MIPModel) -> list[int]:
    """Gate index per depth; raises if a depth is fractional or has no single selection."""
    z = model.vmap.z
    out = []
    for d in range(z.shape[1]):
        vals = np.asarray(assignment)[z[:, d]]
        frac = np.minimum(np.abs(vals), np.abs(1 - vals))
        if frac.max() > EPS_INT:
            raise ValueError(f"depth {d + 1}: selection binaries are not integral")
        on = np.flatnonzero(vals > 0.5)
        if on.size != 1:
            raise ValueError(f"depth {d + 1}: {on.size} gates selected, expected exactly one")
        out.append(int(on[0]))
    return out


def extract_circuit(assignment: np.ndarray, p: PresolvedProblem, model: MIPModel) -> Decomposition:
    """Read the selected gate at each depth; Identity slots are omitted."""
    seq = selected_indices(assignment, model)
    circuit = [p.gates[g].spec for g in seq if g != p.identity_index]
    weights = p.objective_weights()
    return Decomposition(
        circuit=circuit,
        objective=float(sum(weights[g] for g in seq)),
        cnot_count=sum(g.cnot_count for g in circuit),
        depth=len(circuit),
        compressed_depth=compressed_depth(circuit, p.num_qubits),
        phase=model.phase,
        num_qubits=p.num_qubits,
        target_label=p.target_label,
    )


def _lifted(circuit: Sequence, n: int) -> list[ElementaryGate]:
    return [g if isinstance(g, ElementaryGate) else lift_to_circuit(g, n) for g in circuit]


def verify_circuit(
    circuit: Sequence,
    target,
    phase_candidates: Sequence[complex] = (1,),
    tol: float = EPS_FEAS,
    num_qubits: int | None = None,
) -> tuple[bool, complex, float]:
    """Multiply the lifted gates and compare entrywise with every ``c * target``.

    Returns ``(ok, phase, residual)`` for the candidate with the smallest
    max-norm residual.
    """
    t = target.matrix if isinstance(target, Unitary) else np.asarray(target, dtype=complex)
    n = num_qubits or int(round(math.log2(t.shape[0])))
    prod = np.eye(t.shape[0], dtype=complex)
    for g in _lifted(circuit, n):
        prod = prod @ g.matrix
    best_c, best_r = None, math.inf
    for c in phase_candidates:
        r = float(np.max(np.abs(prod - complex(c) * t)))
        if r < best_r:
            best_c, best_r = complex(c), r
    return best_r <= tol, best_c, best_r


def compressed_depth(circuit: Sequence, num_qubits: int | None = None) -> int:
    """Greedy left-packing: a gate joins the last layer iff it shares no qubit with it."""
    layers: list[set] = []
    for g in circuit:
        spec = g.spec if isinstance(g, ElementaryGate) else g
        if spec.family == "Identity":
            continue
        support = set(spec.qubits)
        if layers and not (layers[-1] & support):
            layers[-1] |= support
        else:
            layers.append(support)
    return len(layers)


def depth_reduction(before: int, after: int) -> float:
    """Relative depth saving in percent."""
    return 100.0 * (before - after) / before


# --------------------------------------------------------------------------
# reporting

_CONTROL_TARGET = {"CNot": "X", "CV": "V", "CVdagger": "Vdg", "CH": "H", "CZ": "Z"}


def _cells(spec: GateSpec) -> dict:
    """Qubit -> text of one diagram column (connections handled by the caller)."""
    if spec.family == "KronProduct":
        out = {}
        for part in spec.parts:
            out.update(_cells(part))
        return out
    if spec.family in CONTROLLED:
        c, t = spec.qubits
        return {c: "*", t: f"[{_CONTROL_TARGET[spec.family]}]"}
    name = spec.family
    if spec.angles:
        name += "(" + ",".join(format_angle(a) for a in spec.angles) + ")"
    if len(spec.qubits) == 1:
        return {spec.qubits[0]: f"[{name}]"}
    return {q: f"[{name}:{i + 1}]" for i, q in enumerate(spec.qubits)}


def ascii_diagram(circuit: Sequence[GateSpec], num_qubits: int) -> str:
    rows = {q: f"q{q}: " for q in range(1, num_qubits + 1)}
    pad = max(len(r) for r in rows.values())
    rows = {q: r.ljust(pad) + "-" for q, r in rows.items()}
    for spec in circuit:
        cells = _cells(spec)
        width = max(len(t) for t in cells.values()) + 2
        linked = spec.family != "KronProduct" and len(spec.qubits) > 1
        lo, hi = min(spec.qubits), max(spec.qubits)
        for q in rows:
            if q in cells:
                text = cells[q]
            elif linked and lo < q < hi:
                text = "|"
            else:
                text = ""
            rows[q] += text.center(width, "-") + "-"
    return "\n".join(rows[q] for q in sorted(rows))


def _complex_doc(c: complex | None):
    if c is None:
        return None
    return {"re": round(float(c.real), 12) + 0.0, "im": round(float(c.imag), 12) + 0.0}


def format_phase(c: complex) -> str:
    """``1``, ``-i``, ``0.707+0.707i`` and so on."""
    re, im = round(c.real, 3) + 0.0, round(c.imag, 3) + 0.0
    if im == 0:
        return f"{re:g}"
    imag = {1.0: "i", -1.0: "-i"}.get(im, f"{im:g}i")
    if re == 0:
        return imag
    return f"{re:g}{'' if imag.startswith('-') else '+'}{imag}"


def _num(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return float(v)


def report(d: Decomposition, started: str | None = None) -> tuple[dict, str]:
    """Machine-readable record plus a human summary with an ASCII diagram.

    Wall-clock values live under ``timing`` so two runs can be compared on
    everything else.
    """
    doc = {
        "version": RESULT_VERSION,
        "status": d.status,
        "source": d.source,
        "target": d.target_label,
        "num_qubits": d.num_qubits,
        "objective": _num(d.objective),
        "lower_bound": _num(d.lower_bound),
        "gap": _num(d.gap),
        "nodes": d.nodes,
    }
    has_circuit = d.status in ("optimal", "time_limit", "approximate") and d.objective is not None
    if has_circuit:
        doc.update(
            {
                "circuit": d.labels,
                "depth": d.depth,
                "compressed_depth": d.compressed_depth,
                "cnot_count": d.cnot_count,
                "phase": _complex_doc(d.phase),
                "residual": _num(d.residual),
            }
        )
    if d.details:
        doc["details"] = d.details
    doc["timing"] = {"runtime_s": round(d.runtime, 3), "started": started}

    lines = [f"status: {d.status}"]
    if d.objective is not None:
        lines.append(f"objective: {d.objective:g}")
    if d.gap is not None and d.status == "time_limit":
        lines.append(f"gap: {d.gap:.3g}")
    if has_circuit:
        lines.append(f"circuit: {' '.join(d.labels) if d.labels else '(empty)'}")
        lines.append(
            f"depth {d.depth}, compressed depth {d.compressed_depth}, CNOTs {d.cnot_count}, "
            f"phase {format_phase(d.phase)}, residual {d.residual:.2e}"
        )
        if d.circuit and d.num_qubits:
            lines.append(ascii_diagram(d.circuit, d.num_qubits))
    lines.append(f"runtime: {d.runtime:.2f} s, nodes: {d.nodes}")
    return doc, "\n".join(lines)
