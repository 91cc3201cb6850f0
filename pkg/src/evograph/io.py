"""Schema-versioned CSV/JSON writers and run manifests.

Every CSV starts with a ``# schema_version=N`` comment line, uses ``.`` as
the decimal mark and ``\\n`` line endings, and prints floats with ``repr``
(shortest round-trip form), so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return repr(x)
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(x) for x in row])
    return path


def read_csv(path):
    """Return ``(header, rows)`` with cells as strings; checks the schema line."""
    with open(path, newline="", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != f"# schema_version={SCHEMA_VERSION}":
            raise ValueError(f"{path}: unexpected schema line {first!r}")
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"schema_version": SCHEMA_VERSION, **jsonable(obj)}
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(body, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(out_dir, command, config, artifacts, streams, wall_clock) -> Path:
    """``manifest.json`` next to the artifacts, with their SHA-256 sums."""
    out_dir = Path(out_dir)
    sums = {str(Path(p).relative_to(out_dir)): sha256(p) for p in artifacts}
    return write_json(
        out_dir / "manifest.json",
        {
            "command": command,
            "config": config,
            "streams": list(streams),
            "wall_clock_s": round(wall_clock, 3),
            "artifacts": dict(sorted(sums.items())),
        },
    )
