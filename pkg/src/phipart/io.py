"""CSV sample ingestion and JSON report output."""
from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import ParseError

SCHEMA_VERSION = 1


def load_samples(path) -> np.ndarray:
    """Read one point per row, comma-separated; a non-numeric first row is a header."""
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not rows:
        return np.empty((0, 0))
    first_row, first = rows[0]
    try:
        [float(c) for c in first]
    except ValueError:
        rows = rows[1:]
    if not rows:
        return np.empty((0, len(first)))
    width = len(rows[0][1])
    out = np.empty((len(rows), width))
    for k, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise ParseError(f"expected {width} values, found {len(row)}", row=lineno)
        for j, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell.strip()!r}", row=lineno, column=j + 1) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {cell.strip()!r}", row=lineno, column=j + 1)
            out[k, j] = v
    return out


def write_samples(path, samples) -> None:
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    with open(path, "w", newline="") as fh:
        for row in x:
            # repr gives the shortest string that round-trips exactly
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps_report(report: dict) -> str:
    body = {"schema_version": SCHEMA_VERSION, **report}
    return json.dumps(body, indent=2, default=_default) + "\n"


def write_report(path, report: dict) -> None:
    text = dumps_report(report)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
