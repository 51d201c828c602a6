"""MPS export/import and an external CBC cross-check.

The writer uses the fixed-format column layout (fields starting at columns
2, 5, 15, 25, 40, 50) but keeps the descriptive row and column names from the
model, so fields widen when a name is longer than eight characters. Names never
contain blanks, which keeps the file readable by whitespace-splitting parsers
(CBC, HiGHS and :func:`read_mps` below).
"""

from __future__ import annotations

import os
import re
import shutil
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .formulation import MIPModel

OBJ_ROW = "COST"
_SENSE_CODE = {"=": "E", "<": "L", ">": "G"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}


def _num(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def _field(code: str, name: str) -> str:
    # columns 2-3 hold the code, names start in column 5
    return f" {code:<2} {name}"


def _entry(name: str, row: str, value: float) -> str:
    return f"    {name:<8}  {row:<8}  {_num(value):>12}"


def _check_name(name: str) -> str:
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"MPS names must be non-empty and blank-free: {name!r}")
    return name


def export_mps(model: MIPModel, name: str | None = None) -> str:
    """Serialize a model as MPS text with explicit LO/UP bounds on every column."""
    names = [_check_name(n) for n in model.names]
    rows = [_check_name(r) for r in model.row_names]
    if len(set(names)) != len(names) or len(set(rows)) != len(rows):
        raise ValueError("duplicate row or column names")
    out = [f"NAME          {_check_name(name or model.name or 'circuit')}", "ROWS", _field("N", OBJ_ROW)]
    out += [_field(_SENSE_CODE[s], r) for s, r in zip(model.sense, rows)]

    out.append("COLUMNS")
    csc = model.A.tocsc()
    in_int = False
    marker = 0
    for j, col in enumerate(names):
        if bool(model.integer[j]) != in_int:
            tag = "'INTORG'" if not in_int else "'INTEND'"
            out.append(f"    MARKER{marker:<4}  'MARKER'                 {tag}")
            marker += 1
            in_int = not in_int
        entries = []
        if model.c[j] != 0:
            entries.append((OBJ_ROW, model.c[j]))
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        for i, v in zip(csc.indices[lo:hi], csc.data[lo:hi]):
            if v != 0:
                entries.append((rows[i], v))
        if not entries:
            # keep the column declared so its bounds and type survive
            entries.append((OBJ_ROW, 0.0))
        out += [_entry(col, r, v) for r, v in entries]
    if in_int:
        out.append(f"    MARKER{marker:<4}  'MARKER'                 'INTEND'")

    out.append("RHS")
    out += [_entry("RHS", r, v) for r, v in zip(rows, model.rhs) if v != 0]

    out.append("BOUNDS")
    for col, lb, ub in zip(names, model.lb, model.ub):
        if lb == ub:
            out.append(f" FX BND       {col:<8}  {_num(lb):>12}")
            continue
        out.append(f" LO BND       {col:<8}  {_num(lb):>12}")
        out.append(f" UP BND       {col:<8}  {_num(ub):>12}")
    out.append("ENDATA")
    return "\n".join(out) + "\n"


@dataclass
class MPSData:
    name: str
    c: np.ndarray
    A: sp.csr_matrix
    sense: list
    rhs: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray
    col_names: list
    row_names: list


def read_mps(text: str) -> MPSData:
    """Parse the subset of MPS written by :func:`export_mps` (free-form tokens)."""
    section = None
    name = ""
    obj_row = None
    row_index: dict = {}
    senses: list = []
    col_index: dict = {}
    entries: list = []
    costs: dict = {}
    rhs: dict = {}
    bounds: dict = {}
    integer: dict = {}
    in_int = False
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        tok = raw.split()
        if not raw[0].isspace():
            section = tok[0]
            if section == "NAME":
                name = tok[1] if len(tok) > 1 else ""
            continue
        if section == "ROWS":
            code, row = tok
            if code == "N":
                obj_row = obj_row or row
            else:
                row_index[row] = len(senses)
                senses.append(_CODE_SENSE[code])
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            col = tok[0]
            if col not in col_index:
                col_index[col] = len(col_index)
                integer[col] = in_int
            for row, val in zip(tok[1::2], tok[2::2]):
                if row == obj_row:
                    costs[col] = float(val)
                else:
                    entries.append((row_index[row], col_index[col], float(val)))
        elif section == "RHS":
            for row, val in zip(tok[1::2], tok[2::2]):
                if row != obj_row:
                    rhs[row] = float(val)
        elif section == "BOUNDS":
            code, col = tok[0], tok[2]
            val = float(tok[3]) if len(tok) > 3 else None
            lo, hi = bounds.get(col, (0.0, np.inf))
            if code == "LO":
                lo = val
            elif code == "UP":
                hi = val
            elif code == "FX":
                lo = hi = val
            elif code == "BV":
                lo, hi = 0.0, 1.0
            elif code == "MI":
                lo = -np.inf
            elif code == "FR":
                lo, hi = -np.inf, np.inf
            else:
                raise ValueError(f"unsupported bound type {code}")
            bounds[col] = (lo, hi)
        elif section == "RANGES":
            raise ValueError("RANGES section is not supported")
    cols = sorted(col_index, key=col_index.get)
    rows = sorted(row_index, key=row_index.get)
    if entries:
        r, c, v = zip(*entries)
    else:
        r, c, v = (), (), ()
    A = sp.csr_matrix((v, (r, c)), shape=(len(rows), len(cols)))
    lb = np.array([bounds.get(col, (0.0, np.inf))[0] for col in cols])
    ub = np.array([bounds.get(col, (0.0, np.inf))[1] for col in cols])
    return MPSData(
        name=name,
        c=np.array([costs.get(col, 0.0) for col in cols]),
        A=A,
        sense=senses,
        rhs=np.array([rhs.get(row, 0.0) for row in rows]),
        lb=lb,
        ub=ub,
        integer=np.array([integer[col] for col in cols], dtype=bool),
        col_names=cols,
        row_names=rows,
    )


# --------------------------------------------------------------------------
# external solver


@dataclass
class ExternalResult:
    status: str  # optimal | infeasible | time_limit | error
    objective: float | None
    values: dict
    log: str


def find_cbc() -> str | None:
    """Locate a CBC binary: $CBC_PATH, then PATH, then the copy bundled with pulp."""
    env = os.environ.get("CBC_PATH")
    if env and Path(env).exists():
        return env
    found = shutil.which("cbc")
    if found:
        return found
    try:
        from pulp.apis import coin_api
    except ImportError:
        return None
    path = getattr(coin_api, "pulp_cbc_path", None)
    return path if path and Path(path).exists() else None


def _parse_solution(text: str) -> ExternalResult:
    lines = text.splitlines()
    if not lines:
        return ExternalResult("error", None, {}, text)
    head = lines[0].strip()
    low = head.lower()
    if low.startswith("optimal"):
        status = "optimal"
    elif "infeasible" in low:
        status = "infeasible"
    elif low.startswith("stopped") or "time" in low:
        status = "time_limit"
    else:
        status = "error"
    obj = None
    m = re.search(r"objective value\s+(\S+)", head)
    if m:
        obj = float(m.group(1))
    values = {}
    for line in lines[1:]:
        tok = line.replace("**", " ").split()
        if len(tok) >= 3:
            values[tok[1]] = float(tok[2])
    return ExternalResult(status, obj, values, text)


def solve_external(model_or_text, time_limit: float = 600.0, cbc: str | None = None) -> ExternalResult:
    """Solve an exported model with CBC; raises ``FileNotFoundError`` if CBC is missing."""
    cbc = cbc or find_cbc()
    if cbc is None:
        raise FileNotFoundError("no CBC binary found (set CBC_PATH or install pulp)")
    text = model_or_text if isinstance(model_or_text, str) else export_mps(model_or_text)
    with tempfile.TemporaryDirectory() as tmp:
        mps = Path(tmp) / "model.mps"
        sol = Path(tmp) / "model.sol"
        mps.write_text(text)
        cmd = [cbc, str(mps), "-timeMode", "elapsed", "-sec", str(time_limit), "-threads", "1"]
        cmd += ["-solve", "-solu", str(sol)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=time_limit + 60)
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout.decode(errors="replace") if isinstance(exc.stdout, bytes) else (exc.stdout or "")
            return ExternalResult("time_limit", None, {}, out)
        if not sol.exists():
            return ExternalResult("error", None, {}, proc.stdout + proc.stderr)
        res = _parse_solution(sol.read_text())
        res.log = proc.stdout
        return res
