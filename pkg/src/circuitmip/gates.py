"""Gate algebra: construct, discretize, lift and compare unitaries.

Qubit 1 is the leftmost Kronecker factor, i.e. the most significant bit of a
basis-state index. Two-qubit gates are written on an ordered qubit pair; for
controlled families the pair is ``(control, target)``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

EPS_UNIT = 1e-6

SINGLE_QUBIT = (
    "H", "S", "Sdagger", "X", "SX", "SXdagger", "Y", "Z", "T", "Tdagger",
    "Rx", "Ry", "Rz", "U3",
)
CONTROLLED = ("CNot", "CV", "CVdagger", "CH", "CZ")
TWO_QUBIT = CONTROLLED + ("Swap", "iSwap", "Magic", "GroverDiffusion", "Sycamore", "QFT2")
FAMILIES = SINGLE_QUBIT + TWO_QUBIT + ("Identity", "KronProduct")
ANGLE_ARITY = {"Rx": 1, "Ry": 1, "Rz": 1, "U3": 3}
ALIASES = {"ISwap": "iSwap", "CNOT": "CNot", "I": "Identity", "Grover": "GroverDiffusion"}

_CONTROLLED_BASE = {"CNot": "X", "CV": "SX", "CVdagger": "SXdagger", "CH": "H", "CZ": "Z"}


class GateError(ValueError):
    """Raised for malformed gate specifications."""


@dataclass(frozen=True, eq=False)
class Unitary:
    """Dense complex square matrix of power-of-two dimension."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GateError(f"unitary must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise GateError(f"dimension {dim} is not a power of two")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1

    @property
    def re(self) -> np.ndarray:
        return self.matrix.real

    @property
    def im(self) -> np.ndarray:
        return self.matrix.imag

    def unitarity_error(self) -> float:
        return float(np.max(np.abs(self.matrix @ self.matrix.conj().T - np.eye(self.dim))))

    def is_unitary(self, tol: float = EPS_UNIT) -> bool:
        return self.unitarity_error() < tol

    def is_real(self, tol: float = EPS_UNIT) -> bool:
        return bool(np.max(np.abs(self.matrix.imag)) < tol)

    def __matmul__(self, other: "Unitary") -> "Unitary":
        return Unitary(self.matrix @ other.matrix)

    def __repr__(self):
        return f"Unitary(dim={self.dim})"


# --------------------------------------------------------------------------
# angle formatting / parsing

_ANGLE_RE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?)?\s*\*?\s*(?P<pi>pi|π)?\s*(?:/\s*(?P<den>\d+))?\s*$"
)


def parse_angle(text) -> float:
    """Parse ``0.5``, ``pi/2``, ``-3pi/4``, ``3*pi/2`` or a bare number."""
    try:
        value = float(text)  # also covers exponent notation written by format_angle
    except (TypeError, ValueError):
        pass
    else:
        if not math.isfinite(value):
            raise GateError(f"angle must be finite, got {text!r}")
        return value
    m = _ANGLE_RE.match(str(text))
    if not m or (m["num"] is None and m["pi"] is None):
        raise GateError(f"cannot parse angle {text!r}")
    value = float(m["num"]) if m["num"] is not None else 1.0
    if m["pi"]:
        value *= math.pi
    if m["den"]:
        value /= int(m["den"])
    return -value if m["sign"] == "-" else value


def format_angle(theta: float) -> str:
    if abs(theta) < 1e-12:
        return "0"
    frac = Fraction(theta / math.pi).limit_denominator(16)
    if abs(float(frac) * math.pi - theta) < 1e-9:
        num, den = frac.numerator, frac.denominator
        head = {1: "pi", -1: "-pi"}.get(num, f"{num}pi")
        return head if den == 1 else f"{head}/{den}"
    return f"{theta:.12g}"


# --------------------------------------------------------------------------
# gate specs


@dataclass(frozen=True)
class GateSpec:
    family: str
    qubits: tuple[int, ...] = ()
    angles: tuple[float, ...] = ()
    parts: tuple["GateSpec", ...] = field(default=(), compare=True)

    def __post_init__(self):
        family = ALIASES.get(self.family, self.family)
        object.__setattr__(self, "family", family)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "angles", tuple(float(a) for a in self.angles))
        if family not in FAMILIES:
            raise GateError(f"unknown gate family {self.family!r}")
        if family == "KronProduct":
            if len(self.parts) < 2:
                raise GateError("KronProduct needs at least two factors")
            qs = tuple(q for p in self.parts for q in p.qubits)
            object.__setattr__(self, "qubits", qs)
        arity = ANGLE_ARITY.get(family, 0)
        if len(self.angles) != arity:
            raise GateError(f"{family} takes {arity} angle(s), got {len(self.angles)}")
        width = 0 if family == "Identity" else 1 if family in SINGLE_QUBIT else 2
        if family != "KronProduct" and len(self.qubits) != width:
            raise GateError(f"{family} acts on {width} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise GateError(f"duplicate qubit indices in {self.qubits}")
        if any(q < 1 for q in self.qubits):
            raise GateError(f"qubit indices are 1-based, got {self.qubits}")

    @property
    def label(self) -> str:
        if self.family == "Identity":
            return "Identity"
        if self.family == "KronProduct":
            return "⊗".join(p.label for p in self.parts)
        text = self.family + "".join(f"_{q}" for q in self.qubits)
        if self.angles:
            text += "(" + ",".join(format_angle(a) for a in self.angles) + ")"
        return text

    @property
    def cnot_count(self) -> int:
        if self.family == "KronProduct":
            return sum(p.cnot_count for p in self.parts)
        return int(self.family == "CNot")

    def __str__(self):
        return self.label


_LABEL_RE = re.compile(r"^(?P<fam>[A-Za-z][A-Za-z0-9]*?)(?P<qs>(?:_\d+)*)(?:\((?P<args>[^)]*)\))?$")


def parse_label(label: str, *, allow_missing_angles: bool = False) -> GateSpec | GatePattern:
    """Parse the ``Family_q1[_q2][(a,b,c)]`` grammar, with ``⊗`` for Kronecker products.

    With ``allow_missing_angles`` a parametric family may omit its angles and
    comes back as a :class:`GatePattern`, to be expanded by :func:`discretize`.
    """
    label = label.strip()
    if "⊗" in label:
        parts = [parse_label(p) for p in label.split("⊗")]
        return GateSpec("KronProduct", parts=tuple(parts))
    m = _LABEL_RE.match(label)
    if not m:
        raise GateError(f"malformed gate label {label!r}")
    family = ALIASES.get(m["fam"], m["fam"])
    if family not in FAMILIES or family == "KronProduct":
        raise GateError(f"unknown gate family in label {label!r}")
    qubits = tuple(int(q) for q in m["qs"].split("_")[1:]) if m["qs"] else ()
    angles = tuple(parse_angle(a) for a in m["args"].split(",")) if m["args"] else ()
    if allow_missing_angles and not angles and family in ANGLE_ARITY:
        GateSpec(family, qubits, (0.0,) * ANGLE_ARITY[family])  # validates placement
        return GatePattern(family, qubits)
    return GateSpec(family, qubits, angles)


@dataclass(frozen=True)
class GatePattern:
    """A parametric gate placement whose angles come from a grid (e.g. ``U3_1``)."""

    family: str
    qubits: tuple[int, ...]

    @property
    def label(self) -> str:
        return self.family + "".join(f"_{q}" for q in self.qubits)


def is_pattern(spec) -> bool:
    return isinstance(spec, GatePattern)


# --------------------------------------------------------------------------
# small matrices

_SQ2 = 1 / math.sqrt(2)
_FIXED_1Q = {
    "Identity": np.eye(2),
    "H": np.array([[1, 1], [1, -1]]) * _SQ2,
    "S": np.diag([1, 1j]),
    "Sdagger": np.diag([1, -1j]),
    "X": np.array([[0, 1], [1, 0]]),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1, -1]),
    "SX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "SXdagger": 0.5 * np.array([[1 - 1j, 1 + 1j], [1 + 1j, 1 - 1j]]),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "Tdagger": np.diag([1, np.exp(-1j * math.pi / 4)]),
}

_s = 1 / 2
_FIXED_2Q = {
    "Swap": np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
    "iSwap": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]]),
    # Hill-Wootters / Vatan-Williams magic basis
    "Magic": _SQ2 * np.array([[1, 1j, 0, 0], [0, 0, 1j, 1], [0, 0, 1j, -1], [1, -1j, 0, 0]]),
    # 2|s><s| - I with |s> the uniform superposition
    "GroverDiffusion": 0.5 * np.array(
        [[-1, 1, 1, 1], [1, -1, 1, 1], [1, 1, -1, 1], [1, 1, 1, -1]]
    ),
    # fSim(pi/2, pi/6)
    "Sycamore": np.array(
        [[1, 0, 0, 0], [0, 0, -1j, 0], [0, -1j, 0, 0], [0, 0, 0, np.exp(-1j * math.pi / 6)]]
    ),
    "QFT2": _s * np.array([[1, 1, 1, 1], [1, 1j, -1, -1j], [1, -1, 1, -1], [1, -1j, -1, 1j]]),
}


def _one_qubit_matrix(family: str, angles: Sequence[float]) -> np.ndarray:
    if family in _FIXED_1Q:
        return np.asarray(_FIXED_1Q[family], dtype=complex)
    if family == "Rx":
        (t,) = angles
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if family == "Ry":
        (t,) = angles
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if family == "Rz":
        (t,) = angles
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if family == "U3":
        t, p, l = angles
        c, s = math.cos(t / 2), math.sin(t / 2)
        return np.array(
            [[c, -np.exp(1j * l) * s], [np.exp(1j * p) * s, np.exp(1j * (p + l)) * c]]
        )
    raise GateError(f"{family} is not a one-qubit family")


_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)


def build_small_unitary(spec: GateSpec) -> Unitary:
    """Standard 2x2 / 4x4 matrix of ``spec`` on its own qubits (in slot order)."""
    if is_pattern(spec):
        raise GateError(f"{spec.label} has no angles; discretize it first")
    fam = spec.family
    if fam in SINGLE_QUBIT or fam == "Identity":
        return Unitary(_one_qubit_matrix(fam, spec.angles))
    if fam in CONTROLLED:
        base = _FIXED_1Q[_CONTROLLED_BASE[fam]]
        return Unitary(np.kron(_P0, np.eye(2)) + np.kron(_P1, base))
    if fam in _FIXED_2Q:
        return Unitary(_FIXED_2Q[fam])
    raise GateError(f"no small matrix for {fam}")


# --------------------------------------------------------------------------
# lifting


def embed(matrix: np.ndarray, qubits: Sequence[int], num_qubits: int) -> np.ndarray:
    """Place a k-qubit operator on ``qubits`` (slot order) of an N-qubit register."""
    k = len(qubits)
    if matrix.shape != (2**k, 2**k):
        raise GateError(f"operator of shape {matrix.shape} does not act on {k} qubit(s)")
    n = num_qubits
    # axes: outputs (n), inputs (n); operator axes: outputs (k), inputs (k)
    op = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    full = np.eye(2**n, dtype=complex).reshape((2,) * (2 * n))
    axes = [q - 1 for q in qubits]
    out = np.tensordot(op, full, axes=(list(range(k, 2 * k)), axes))
    # tensordot puts the operator's output axes first; move them back into place
    rest = [a for a in range(n) if a not in axes]
    order = axes + rest + list(range(n, 2 * n))
    out = np.moveaxis(out, list(range(2 * n)), order)
    return out.reshape(2**n, 2**n)


def _lift_matrix(spec: GateSpec, n: int) -> np.ndarray:
    fam = spec.family
    if fam == "Identity":
        return np.eye(2**n, dtype=complex)
    if fam == "KronProduct":
        return reduce(np.matmul, (_lift_matrix(p, n) for p in spec.parts))
    if fam in CONTROLLED:
        c, t = spec.qubits
        base = _FIXED_1Q[_CONTROLLED_BASE[fam]]
        return embed(_P0, [c], n) + embed(_P1, [c], n) @ embed(base, [t], n)
    return embed(build_small_unitary(spec).matrix, spec.qubits, n)


@dataclass(frozen=True, eq=False)
class ElementaryGate:
    spec: GateSpec
    lifted: Unitary

    @property
    def label(self) -> str:
        return self.spec.label

    @property
    def matrix(self) -> np.ndarray:
        return self.lifted.matrix

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.spec.qubits)

    @property
    def is_identity(self) -> bool:
        return self.spec.family == "Identity"

    def __repr__(self):
        return f"ElementaryGate({self.label})"


def lift_to_circuit(spec: GateSpec, num_qubits: int) -> ElementaryGate:
    if is_pattern(spec):
        raise GateError(f"{spec.label} has no angles; discretize it first")
    bad = [q for q in spec.qubits if not 1 <= q <= num_qubits]
    if bad:
        raise GateError(f"{spec.label}: qubit(s) {bad} outside 1..{num_qubits}")
    if spec.family == "KronProduct":
        seen = [q for p in spec.parts for q in p.qubits]
        if len(seen) != len(set(seen)):
            raise GateError(f"{spec.label}: Kronecker factors overlap")
    return ElementaryGate(spec, Unitary(_lift_matrix(spec, num_qubits)))


def circuit_unitary(gates: Iterable[ElementaryGate], num_qubits: int) -> np.ndarray:
    """Ordered product ``G_1 G_2 ... G_k`` of lifted gates."""
    out = np.eye(2**num_qubits, dtype=complex)
    for g in gates:
        out = out @ g.matrix
    return out


# --------------------------------------------------------------------------
# discretization


def discretize(
    family: str,
    angle_grids: Sequence[Sequence[float]],
    placements: Sequence[Sequence[int]] = ((1,),),
) -> list[GateSpec]:
    """One spec per (placement, angle combination), angles varying fastest."""
    family = ALIASES.get(family, family)
    arity = ANGLE_ARITY.get(family)
    if arity is None:
        raise GateError(f"{family} has no continuous angles")
    if len(angle_grids) != arity:
        raise GateError(f"{family} needs {arity} angle grid(s), got {len(angle_grids)}")
    if any(len(g) == 0 for g in angle_grids):
        raise GateError(f"empty angle grid for {family}")
    return [
        GateSpec(family, tuple(q), tuple(angles))
        for q in placements
        for angles in itertools.product(*angle_grids)
    ]


# --------------------------------------------------------------------------
# comparisons and algebraic properties


def _as_array(u) -> np.ndarray:
    if isinstance(u, Unitary):
        return u.matrix
    if isinstance(u, ElementaryGate):
        return u.matrix
    return np.asarray(u, dtype=complex)


def equiv_up_to_phase(u, v, tol: float = EPS_UNIT) -> tuple[bool, complex | None]:
    """Is ``u == c * v`` for some unit-modulus ``c``? Returns ``(ok, c)``."""
    a, b = _as_array(u), _as_array(v)
    if a.shape != b.shape:
        raise GateError(f"dimension mismatch: {a.shape} vs {b.shape}")
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) < tol:
        return False, None
    c = a[k] / b[k]
    if abs(abs(c) - 1) > tol or np.max(np.abs(a - c * b)) > tol:
        return False, None
    return True, complex(c)


@dataclass(frozen=True)
class SingleFlags:
    involutory: bool
    idempotent: bool
    square_phase: complex | None = None  # U^2 = phase * I when involutory


@dataclass(frozen=True)
class PairFlags:
    commute: bool
    redundant_product_index: int | None = None
    product_phase: complex | None = None  # U V = phase * W_index


def classify_single(u, tol: float = EPS_UNIT) -> SingleFlags:
    a = _as_array(u)
    sq = a @ a
    inv, phase = equiv_up_to_phase(sq, np.eye(a.shape[0]), tol)
    idem = bool(np.max(np.abs(sq - a)) < tol)
    return SingleFlags(involutory=inv, idempotent=idem, square_phase=phase)


def classify_pair(u, v, natives: Sequence = (), tol: float = EPS_UNIT) -> PairFlags:
    """Commutation of ``u, v`` and whether ``u @ v`` is (a phase times) a native gate."""
    a, b = _as_array(u), _as_array(v)
    if a.shape != b.shape:
        raise GateError(f"dimension mismatch: {a.shape} vs {b.shape}")
    ab = a @ b
    commute = bool(np.max(np.abs(ab - b @ a)) < tol)
    for j, w in enumerate(natives):
        ok, c = equiv_up_to_phase(ab, w, tol)
        if ok:
            return PairFlags(commute, j, c)
    return PairFlags(commute)
