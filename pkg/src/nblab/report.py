"""CSV/JSON serialization with provenance.

Every number written carries the route that produced it and an error
estimate. Floats go out with ``repr`` (shortest round-trip form, at most 17
significant digits), so ``parse(emit(x)) == x`` bit for bit.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__


@dataclass(frozen=True)
class ProvenancedValue:
    value: float
    est_error: float = 0.0
    route: str = "direct"
    truncation: float = float("nan")

    def __post_init__(self):
        if not self.route:
            raise ValueError("route must be nonempty")
        if not (self.est_error >= 0):
            raise ValueError(f"est_error must be >= 0, got {self.est_error}")

    def to_json(self) -> dict:
        d = asdict(self)
        if math.isnan(d["truncation"]):
            d["truncation"] = None
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ProvenancedValue":
        tr = d.get("truncation")
        return cls(float(d["value"]), float(d.get("est_error", 0.0)), d.get("route", "direct"),
                   float("nan") if tr is None else float(tr))


def fmt(x) -> str:
    """Lossless text form of a float."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _header_lines(meta: dict) -> list:
    lines = [f"# nblab {__version__}"]
    for k, v in meta.items():
        lines.append(f"# {k}: {json.dumps(v) if not isinstance(v, str) else v}")
    return lines


def read_header(path) -> dict:
    """The ``# key: value`` metadata of a CSV written by this module."""
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip()
            if ": " in body:
                k, v = body.split(": ", 1)
                try:
                    meta[k] = json.loads(v)
                except json.JSONDecodeError:
                    meta[k] = v
    return meta


def _as_pv(x) -> ProvenancedValue:
    return x if isinstance(x, ProvenancedValue) else ProvenancedValue(float(x))


def emit_matrix(m, path, meta: dict | None = None, sidecar: bool = True, sym_tol: float = 0.0) -> Path:
    """Write a matrix of values (or ProvenancedValue) as CSV.

    Errors and routes go to ``<path>.err.csv`` when ``sidecar`` is set, else
    are interleaved as ``value,err`` column pairs.
    """
    rows = [[_as_pv(x) for x in row] for row in m]
    if not rows or any(len(r) != len(rows[0]) for r in rows):
        raise ValueError("matrix must be rectangular and nonempty")
    for i, row in enumerate(rows):
        for j, pv in enumerate(row):
            if math.isnan(pv.value):
                raise ValueError(f"NaN entry at ({i}, {j})")
    vals = np.array([[pv.value for pv in row] for row in rows])
    square = vals.shape[0] == vals.shape[1]
    symmetric = bool(square and np.all(np.abs(vals - vals.T) <= sym_tol))
    routes = sorted({pv.route for row in rows for pv in row})
    header = {"shape": list(vals.shape), "symmetric": symmetric, "routes": routes}
    header.update(meta or {})
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(_header_lines(header)) + "\n")
        w = csv.writer(fh)
        for row in rows:
            if sidecar:
                w.writerow([fmt(pv.value) for pv in row])
            else:
                w.writerow([s for pv in row for s in (fmt(pv.value), fmt(pv.est_error))])
    if sidecar:
        with open(str(path) + ".err.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["i", "j", "est_error", "route", "truncation"])
            for i, row in enumerate(rows):
                for j, pv in enumerate(row):
                    w.writerow([i, j, fmt(pv.est_error), pv.route, fmt(pv.truncation)])
    return path


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    return np.array([[float(v) for v in row] for row in csv.reader(lines)])


def emit_table(rows: Sequence[dict], columns: Sequence[str], path, meta: dict | None = None) -> Path:
    """CSV table with a ``#`` metadata header; floats written losslessly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if meta:
            fh.write("\n".join(_header_lines(meta)) + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
    return path


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    return str(v)


def read_table(path) -> list:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for r in csv.DictReader(io.StringIO("".join(lines))):
        out.append({k: _parse_cell(v) for k, v in r.items()})
    return out


def _parse_cell(v: str):
    if v == "":
        return None
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, ProvenancedValue):
        return o.to_json()
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    # json uses repr for floats, which is already lossless
    return json.dumps(obj, default=_json_default, indent=1, allow_nan=True)


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(dumps(obj) + "\n")
    os.replace(tmp, path)
    return path


def read_json(path):
    return json.loads(Path(path).read_text())
