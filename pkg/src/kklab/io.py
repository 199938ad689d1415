"""CSV and JSON writers.

Snapshot CSVs have the header ``x,u,v,r,xi`` and 17 significant digits so
that a reread is bit-exact.  JSON reports are written with sorted keys and
carry a ``schema`` entry.
"""

from __future__ import annotations

import json
import math
import os

import numpy as np

from .errors import IoError
from .viscous import FieldPair

__all__ = [
    "SNAPSHOT_SCHEMA",
    "REPORT_SCHEMA",
    "write_snapshot_csv",
    "read_snapshot_csv",
    "write_report_json",
    "dumps_report",
    "write_rows_csv",
]

SNAPSHOT_SCHEMA = "kklab.snapshot/1"
REPORT_SCHEMA = "kklab.report/1"
SNAPSHOT_HEADER = "x,u,v,r,xi"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_rows_csv(path, header: str, columns) -> None:
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [header]
    for row in zip(*cols):
        lines.append(",".join(_fmt(v) for v in row))
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None


def write_snapshot_csv(fp: FieldPair, path, x) -> None:
    """Write one snapshot; ``x`` are the cell centres."""
    u, v = fp.uv()
    x = np.asarray(x, dtype=float)
    if x.shape != u.shape:
        raise ValueError("x must match the field length")
    write_rows_csv(path, SNAPSHOT_HEADER, (x, u, v, u * v, u / v))


def read_snapshot_csv(path):
    """Return ``(x, u, v, r, xi)`` arrays."""
    try:
        with open(path, encoding="ascii") as fh:
            header = fh.readline().rstrip("\n")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from None
    if header != SNAPSHOT_HEADER:
        raise IoError(f"{path}: unexpected header {header!r}")
    return tuple(data[:, i].copy() for i in range(5))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def dumps_report(report: dict) -> str:
    payload = {"schema": REPORT_SCHEMA, **_clean(report)}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_report_json(report: dict, path) -> None:
    text = dumps_report(report)
    try:
        directory = os.path.dirname(os.fspath(path))
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from None
