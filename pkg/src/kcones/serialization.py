"""JSON encoding for matrices and the objects built from them.

Matrix format::

    {"rows": r, "cols": c, "re": [[...], ...], "im": [[...], ...]}

with row-major nested lists; a missing ``"im"`` means a real matrix.
Functionals and channels wrap a matrix::

    {"kind": "functional" | "channel" | "operator", "n": n, "m": m, "matrix": {...}}

All writers emit plain Python floats and the CLI dumps with sorted keys, so
identical inputs give byte-identical output.
"""

from __future__ import annotations

import json
import math
from typing import Any

import numpy as np

from .linalg import DimensionError


class FormatError(ValueError):
    """Input is not valid JSON of the expected shape."""


def _clean(x: float) -> float | None:
    x = float(x)
    if not math.isfinite(x):
        return None  # JSON has no infinities
    if x == 0.0:
        return 0.0  # drop the sign of negative zero
    return x


def matrix_to_json(M) -> dict:
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    out = {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "re": [[_clean(x) for x in row] for row in M.real],
    }
    if np.any(M.imag != 0):
        out["im"] = [[_clean(x) for x in row] for row in M.imag]
    return out


def _nested(obj, rows, cols, name):
    if not isinstance(obj, list) or len(obj) != rows:
        raise DimensionError(f'"{name}" must have {rows} rows')
    arr = []
    for row in obj:
        if not isinstance(row, list) or len(row) != cols:
            raise DimensionError(f'every row of "{name}" must have {cols} entries')
        for x in row:
            if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
                raise FormatError(f'"{name}" entries must be finite numbers')
        arr.append(row)
    return np.array(arr, dtype=float).reshape(rows, cols)


def matrix_from_json(d: Any) -> np.ndarray:
    if not isinstance(d, dict):
        raise FormatError("matrix JSON must be an object")
    try:
        rows, cols = d["rows"], d["cols"]
        re = d["re"]
    except KeyError as exc:
        raise FormatError(f"matrix JSON is missing key {exc}") from None
    if isinstance(rows, bool) or isinstance(cols, bool) or not (isinstance(rows, int) and isinstance(cols, int)):
        raise FormatError('"rows" and "cols" must be integers')
    if rows < 0 or cols < 0:
        raise FormatError('"rows" and "cols" must be nonnegative')
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=complex)
    M = _nested(re, rows, cols, "re").astype(complex)
    if "im" in d and d["im"] is not None:
        M = M + 1j * _nested(d["im"], rows, cols, "im")
    return M


def vector_to_json(u) -> dict:
    return matrix_to_json(np.asarray(u, dtype=complex).reshape(-1, 1))


def vector_from_json(d: Any) -> np.ndarray:
    """A vector is a matrix with one column (or one row)."""
    M = matrix_from_json(d)
    if 1 not in M.shape:
        raise DimensionError(f"expected a single row or column, got {M.shape[0]}x{M.shape[1]}")
    return M.reshape(-1)


def wrapped_to_json(kind: str, n: int, m: int, matrix) -> dict:
    return {"kind": kind, "n": int(n), "m": int(m), "matrix": matrix_to_json(matrix)}


def wrapped_from_json(d: Any, kinds=("operator", "functional", "channel")) -> tuple[str, int, int, np.ndarray]:
    """Parse a wrapped matrix; returns ``(kind, n, m, matrix)``."""
    if not isinstance(d, dict):
        raise FormatError("expected a JSON object")
    kind = d.get("kind", "operator")
    if kind not in kinds:
        raise FormatError(f'"kind" must be one of {list(kinds)}, got {kind!r}')
    try:
        n, m, mat = d["n"], d["m"], d["matrix"]
    except KeyError as exc:
        raise FormatError(f"missing key {exc}") from None
    if not (isinstance(n, int) and isinstance(m, int)) or n < 1 or m < 1:
        raise FormatError('"n" and "m" must be positive integers')
    M = matrix_from_json(mat)
    if M.shape != (n * m, n * m):
        raise DimensionError(f"matrix is {M.shape[0]}x{M.shape[1]}, expected {n*m}x{n*m}")
    return kind, n, m, M


def to_jsonable(obj: Any) -> Any:
    """Recursively turn arrays and numpy scalars into JSON-ready values.

    Arrays become matrix JSON; objects with a ``to_json`` method use it.
    """
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, np.ndarray):
        return matrix_to_json(obj)
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _clean(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"malformed JSON: {exc}") from None
