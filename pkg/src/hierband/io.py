"""File formats: numeric CSV in, 17-significant-digit CSV and JSON out.

Every writer goes through a temporary file in the destination directory
followed by ``os.replace``, so a crash never leaves a half-written output.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from os import PathLike

import numpy as np

SCHEMA_VERSION = "1"


def fmt_float(x: float) -> str:
    """``%.17g``: enough digits to round-trip any double."""
    return f"{x:.17g}"


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def read_csv_rows(path: str | PathLike) -> tuple[list[str] | None, list[list[str]]]:
    """Split a CSV into ``(header, rows)``; the first row is a header when any field is non-numeric."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = None
    if not all(_is_number(f) for f in rows[0]):
        header, rows = rows[0], rows[1:]
    return header, rows


def read_matrix(path: str | PathLike) -> np.ndarray:
    """Numeric 2-D array from a CSV, with optional header row."""
    _, rows = read_csv_rows(path)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"{path}: row {i + 1} has {len(r)} fields, expected {width}")
    try:
        return np.array([[float(f) for f in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None


def read_labels(path: str | PathLike) -> np.ndarray:
    """Class labels from the first column of a CSV.

    Labels stay strings unless every one parses as an integer.
    """
    with open(path, newline="") as fh:
        vals = [r[0].strip() for r in csv.reader(fh) if r and r[0].strip()]
    if vals and not _is_number(vals[0]) and all(_is_number(v) for v in vals[1:]):
        vals = vals[1:]  # header
    if not vals:
        raise ValueError(f"{path}: no labels")
    try:
        return np.array([int(v) for v in vals])
    except ValueError:
        return np.array(vals)


def _atomic_write(path: str | PathLike, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _cell(v) -> str:
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    if v is None:
        return ""
    return str(v)


def write_matrix(path: str | PathLike, M: np.ndarray) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    _atomic_write(path, "".join(",".join(fmt_float(x) for x in row) + "\n" for row in M))


def write_table(path: str | PathLike, header: list[str], rows) -> None:
    lines = [",".join(header)] + [",".join(_cell(v) for v in r) for r in rows]
    _atomic_write(path, "\n".join(lines) + "\n")


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return fmt_float(x) if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with floats at 17 significant digits and non-finite values as ``null``.

    Keys keep insertion order, so equal inputs give byte-identical output.
    """
    return _encode(obj, indent, 0) + "\n"


def write_json(path: str | PathLike, payload: dict, config: dict) -> None:
    """Write ``payload`` under a ``schema_version`` and the resolved run configuration."""
    doc = {"schema_version": SCHEMA_VERSION, "config": config}
    doc.update(payload)
    _atomic_write(path, dumps(doc))
