"""CSV and JSON writers shared by every data product.

CSV files start with ``# key=value`` metadata lines, then one header row,
then data rows; the first column is the axis. Floats are written with
``repr`` so a file round-trips exactly and repeated runs are byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from . import __version__


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: to_jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _meta_lines(meta: dict) -> list:
    full = {"rydsub_version": __version__, **meta}
    lines = []
    for key in sorted(full):
        value = full[key]
        if not isinstance(value, str):
            value = json.dumps(to_jsonable(value), sort_keys=True, separators=(",", ":"))
        lines.append(f"# {key}={value}")
    return lines


def _fmt(v) -> str:
    return repr(float(v))


def write_csv(path, header, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(header):
        raise ValueError(f"rows of shape {rows.shape} do not match {len(header)} columns")
    if any("," in h for h in header):
        raise ValueError("column names must not contain commas")
    out = _meta_lines(meta or {})
    out.append(",".join(header))
    out.extend(",".join(_fmt(v) for v in row) for row in rows.tolist())
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path


def read_csv(path):
    """Return ``(meta, header, data)``; metadata values stay strings."""
    meta, header, data = {}, None, []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif header is None:
            header = line.split(",")
        else:
            data.append([float(v) for v in line.split(",")])
    return meta, header, np.asarray(data, dtype=float).reshape(-1, len(header or []))


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {"rydsub_version": __version__, **to_jsonable(obj)}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
