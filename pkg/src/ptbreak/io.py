"""Deterministic CSV/JSON serialization, atomic file writes and manifests."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def fmt_float(x) -> str:
    """Shortest round-trip representation (at most 17 significant digits)."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return fmt_float(value)
    return str(value)


def csv_bytes(header, rows) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue().encode("utf-8")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value"):  # enums
        return obj.value
    return obj


def json_bytes(payload) -> bytes:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)
    return (text + "\n").encode("utf-8")


def write_atomic(path: str | Path, data: bytes) -> Path:
    """Write ``data`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def run_id(command: str, config: dict) -> str:
    """Content hash of the resolved configuration."""
    return sha256(json_bytes({"command": command, "config": config}))[:16]


def manifest(command: str, config: dict, files: dict[str, bytes], version: str) -> dict:
    """Manifest listing every emitted file with its hash.

    The resolved ``config`` echo is enough to rerun the command exactly.
    Wall time is reported on stderr, not here, so reruns are byte-identical.
    """
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "run_id": run_id(command, config),
        "version": version,
        "config": config,
        "files": {name: {"sha256": sha256(data), "bytes": len(data)}
                  for name, data in sorted(files.items())},
    }
