"""Deterministic report writers.

Every writer emits exactly reproducible bytes for a fixed payload: floats
are serialized with repr (shortest round-trip), JSON keys are sorted, and
no timestamps or environment state enter the files.  Reports embed the
resolved configuration so an archived file regenerates itself.
"""
from __future__ import annotations

import enum
import json
import os
from pathlib import Path

import numpy as np

from .grids import SampledFunction


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and paths to JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def format_cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, complex):
        return repr(v).strip("()")
    return str(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_cell(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path


def write_function(f: SampledFunction, base) -> tuple[Path, Path]:
    """Serialize a sampled function: CSV with one node per row
    (coordinates then value) plus a JSON header with the grid metadata."""
    base = Path(base)
    g = f.grid
    header = [f"x{i}" for i in range(g.dim)] + ["value"]
    rows = []
    if g.dim == 1:
        xs = g.axis(0)
        for x, v in zip(xs, np.asarray(f.values)):
            rows.append((float(x), _scalar(v)))
    else:
        xs, ys = g.axis(0), g.axis(1)
        vals = np.asarray(f.values)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                rows.append((float(x), float(y), _scalar(vals[i, j])))
    csv_path = write_csv(base.with_suffix(".csv"), header, rows)
    meta = {"name": f.name, "domain": g.domain.value, "lo": list(g.lo),
            "hi": list(g.hi), "h": g.h, "shape": list(g.shape)}
    json_path = write_json(base.with_suffix(".json"), meta)
    return csv_path, json_path


def _scalar(v):
    if np.iscomplexobj(v):
        return complex(v)
    return float(v)


def output_dir(cli_value=None) -> Path:
    """Resolve the report directory: explicit flag, else the BMOHEAT_OUT
    environment variable, else ./reports."""
    if cli_value:
        return Path(cli_value)
    env = os.environ.get("BMOHEAT_OUT")
    return Path(env) if env else Path("reports")
