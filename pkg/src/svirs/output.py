"""JSON and CSV writers shared by the CLI and the sweep."""

from __future__ import annotations

import csv
import enum
import io
import json
import math

import numpy as np


def jsonable(obj):
    """Convert results to JSON-safe values.

    Non-finite floats become the strings ``"nan"``, ``"inf"``, ``"-inf"``;
    complex numbers become ``{"re": ..., "im": ...}``.  Finite floats are
    passed through untouched so re-parsing is bit-exact.
    """
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        return {"re": jsonable(z.real), "im": jsonable(z.imag)}
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "as_dict"):
        return jsonable(obj.as_dict())
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2, allow_nan=False) + "\n"


def format_number(x) -> str:
    """Shortest repr that round-trips, e.g. ``0.1`` or ``1e-05``."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(x) for x in row])
    return buf.getvalue()


def trajectory_csv(traj) -> str:
    return csv_text(traj.COLUMNS, traj.samples.tolist())


def snapshot_csv(ages, R) -> str:
    return csv_text(("a", "R"), zip(np.asarray(ages).tolist(), np.asarray(R).tolist()))
