"""CSV grid functions, kernel and coefficient dumps, JSON reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import jsonschema
import numpy as np

from .grid import GridMismatch, WeightedGrid
from .littlewood_paley import LPCoefficients

COORD_TOL = 1e-9

REPORT_SCHEMA = {
    "type": "object",
    "required": ["command", "config", "summary", "passed"],
    "properties": {
        "command": {"type": "string"},
        "suite": {"type": "string"},
        "config": {"type": "object"},
        "summary": {"type": "object"},
        "trials": {"type": "object"},
        "passed": {"type": "boolean"},
    },
}


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def save_function(path: str | Path, f: np.ndarray, grid: WeightedGrid) -> None:
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.size,):
        raise GridMismatch(f"function has shape {f.shape}, grid has {grid.size} points")
    n = grid.spec.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{a + 1}" for a in range(n)] + ["value"])
        for pt, v in zip(grid.points, f):
            w.writerow([_fmt(c) for c in pt] + [_fmt(v)])


def load_function(path: str | Path, grid: WeightedGrid) -> np.ndarray:
    """Read a grid function, checking every coordinate against ``grid``.

    Rows are numbered from 1 after the header.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file {path} not found")
    n = grid.spec.n
    expected = [f"x{a + 1}" for a in range(n)] + ["value"]
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [h.strip() for h in rows[0]] != expected:
        raise GridMismatch(f"{path}: header must be {','.join(expected)}")
    body = rows[1:]
    values = np.empty(grid.size)
    for i in range(max(len(body), grid.size)):
        if i >= len(body):
            raise GridMismatch(f"{path}: row {i + 1}: file ends, grid has {grid.size} points")
        if i >= grid.size:
            raise GridMismatch(f"{path}: row {i + 1}: extra row, grid has {grid.size} points")
        row = body[i]
        if len(row) != n + 1:
            raise GridMismatch(f"{path}: row {i + 1}: expected {n + 1} fields")
        nums = np.array([float(c) for c in row])
        if np.max(np.abs(nums[:n] - grid.points[i])) > COORD_TOL:
            raise GridMismatch(
                f"{path}: row {i + 1}: point {nums[:n].tolist()} does not match grid point "
                f"{grid.points[i].tolist()}"
            )
        if not math.isfinite(nums[n]):
            raise ValueError(f"{path}: row {i + 1}: non-finite value")
        values[i] = nums[n]
    return values


def save_kernel(path: str | Path, t: float, kernel: np.ndarray) -> None:
    m = kernel.shape[0]
    ii, jj = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    table = np.column_stack([np.full(m * m, t), ii.ravel(), jj.ravel(), kernel.ravel()])
    np.savetxt(path, table, fmt=["%.17g", "%d", "%d", "%.17g"], delimiter=",",
               header="t,x_index,y_index,value", comments="")


def save_coefficients(path: str | Path, coeffs: LPCoefficients) -> None:
    n = coeffs.dyadic.grid.spec.n
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "cube_index"] + [f"center{a + 1}" for a in range(n)] + ["omega_Q", "value", "windowed"])
        for k, vals in sorted(coeffs.values.items()):
            level = coeffs.dyadic[k]
            for q, (c, om, v) in enumerate(zip(level.centers, level.omega, vals)):
                w.writerow([k, q] + [_fmt(x) for x in c] + [_fmt(om), _fmt(v), int(coeffs.windowed)])


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def render_report(report: dict) -> str:
    doc = to_jsonable(report)
    jsonschema.validate(doc, REPORT_SCHEMA)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def save_report(path: str | Path, report: dict) -> None:
    Path(path).write_text(render_report(report))
