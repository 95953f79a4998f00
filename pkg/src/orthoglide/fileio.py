"""Reading and writing the package's data files.

* Input parameters: flat ``key = value`` text, ``#`` starts a comment,
  comma-separated values become lists.
* Reports: JSON with sorted keys (byte-identical for identical inputs).
* Fields and maps: CSV with a header row.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import MachineParams, validate_params
from .stiffness import LegStiffnessParams

__all__ = [
    "load_kv",
    "dump_kv",
    "load_machine",
    "save_machine",
    "load_stiffness",
    "save_stiffness",
    "write_json",
    "read_json",
    "write_csv",
    "read_csv",
]


def _parse_scalar(text):
    text = text.strip()
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def load_kv(path) -> dict:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if "," in value:
            out[key] = [_parse_scalar(v) for v in value.split(",")]
        else:
            out[key] = _parse_scalar(value)
    return out


def _fmt(value):
    if isinstance(value, (list, tuple, np.ndarray)):
        return ", ".join(_fmt(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_kv(mapping, path, header: str | None = None) -> None:
    lines = [f"# {h}" for h in header.splitlines()] if header else []
    lines += [f"{key} = {_fmt(value)}" for key, value in mapping.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def load_machine(path) -> MachineParams:
    return validate_params(load_kv(path))


def save_machine(params: MachineParams, path, header: str | None = None) -> None:
    dump_kv(params.to_raw(), path, header)


def load_stiffness(path) -> LegStiffnessParams:
    return LegStiffnessParams.from_raw(load_kv(path))


def save_stiffness(stiff: LegStiffnessParams, path, header: str | None = None) -> None:
    dump_kv(stiff.to_raw(), path, header)


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def read_csv(path) -> dict:
    """Columns of a CSV file as numpy arrays keyed by header name."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = list(r)
    cols = list(zip(*rows)) if rows else [()] * len(header)
    return {name: np.array([float(v) for v in col]) for name, col in zip(header, cols)}
