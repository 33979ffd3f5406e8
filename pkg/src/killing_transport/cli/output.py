"""Deterministic CSV and JSON artifacts."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from ..errors import OutputError


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def emit_csv(path, table: Mapping[str, Sequence] | tuple) -> Path:
    """Write a column table as CSV with a header row.

    Parameters
    ----------
    path : path-like
    table : mapping of column name to values, or ``(columns, rows)``
        Floats are written with 17 significant digits; an empty table still
        gets its header.

    Raises
    ------
    OutputError
        If the file cannot be written; the diagnostic names the path.
    """
    path = Path(path)
    if isinstance(table, tuple):
        columns, rows = list(table[0]), [list(r) for r in table[1]]
    else:
        columns = list(table)
        cols = [list(np.asarray(table[c]).ravel()) if np.ndim(table[c]) else [table[c]] for c in columns]
        n = {len(c) for c in cols}
        if len(n) > 1:
            raise ValueError(f"columns have different lengths {sorted(n)}")
        rows = [list(r) for r in zip(*cols)]
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([_cell(x) for x in r])
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}").with_context(path=str(path)) from exc
    return path


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become ``null``."""
    if isinstance(obj, Mapping):
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
        f = float(obj)
        return f if math.isfinite(f) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def emit_json(path, obj) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(dumps(obj))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}").with_context(path=str(path)) from exc
    return path


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
