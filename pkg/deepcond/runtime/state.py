"""
Result files, provenance and matrix inputs.

Rules:
- Every file is written atomically: temp file in the destination directory, then os.replace.
- UTF-8 without BOM; JSON with indent=2; CSV floats with 17 significant digits.
- Provenance lines in CSV start with '#'.

Public API:
- config_hash(config) -> str
- compute_environment_fingerprint() -> dict
- provenance(config, seed) -> dict
- atomic_write(path, data, attempts=3, delay=0.25)
- write_json(path, data) / dumps_json(data) -> str
- write_csv(path, columns, rows, header=None) / dumps_csv(columns, rows, header=None) -> str
- read_matrix(path) -> ndarray
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import tempfile
import time
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import scipy

from deepcond import __version__
from deepcond.errors import ParseError, ResourceError

FLOAT_FORMAT = "%.17g"


def _canonical(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist())
    if isinstance(obj, np.generic):
        return _canonical(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def config_hash(config: Dict[str, Any]) -> str:
    payload = json.dumps(_canonical(config), sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def compute_environment_fingerprint() -> Dict[str, Any]:
    return {
        "os": platform.platform(),
        "python": sys.version.split()[0],
        "libs": {"numpy": np.__version__, "scipy": scipy.__version__},
    }


def provenance(config: Dict[str, Any], seed: Optional[int]) -> Dict[str, Any]:
    return {
        "version": __version__,
        "config_hash": config_hash(config),
        "seed": seed,
        "environment": compute_environment_fingerprint(),
        "config": _canonical(config),
    }


# ==================================
# Writers
# ==================================
def atomic_write(path: str, data: str, attempts: int = 3, delay: float = 0.25) -> None:
    """Replace `path` with `data` in one rename; retries transient OS errors."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    for i in range(attempts):
        fd, tmp = tempfile.mkstemp(prefix=".deepcond-", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(data)
            os.replace(tmp, path)
            return
        except OSError as exc:
            if os.path.exists(tmp):
                os.remove(tmp)
            if i == attempts - 1:
                raise ResourceError("could not write output file", {"path": path, "reason": str(exc)}) from exc
            time.sleep(delay)


def dumps_json(data: Dict[str, Any]) -> str:
    return json.dumps(_canonical(data), ensure_ascii=False, indent=2) + "\n"


def write_json(path: str, data: Dict[str, Any]) -> None:
    atomic_write(path, dumps_json(data))


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT % float(v)
    return str(v)


def dumps_csv(columns: Sequence[str], rows: Iterable[Sequence[Any]],
              header: Optional[Dict[str, Any]] = None) -> str:
    buf = io.StringIO()
    for key, value in (header or {}).items():
        text = value if isinstance(value, str) else json.dumps(_canonical(value), sort_keys=True, ensure_ascii=False)
        buf.write(f"# {key}: {text}\r\n")
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(list(columns))
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def write_csv(path: str, columns: Sequence[str], rows: Iterable[Sequence[Any]],
              header: Optional[Dict[str, Any]] = None) -> None:
    atomic_write(path, dumps_csv(columns, rows, header))


# ==================================
# Readers
# ==================================
def _read_csv_matrix(text: str) -> np.ndarray:
    rows: List[List[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = next(csv.reader([stripped]))
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"non-numeric entry in row {cells!r}", lineno)
        if rows and len(values) != len(rows[0]):
            raise ParseError(f"row has {len(values)} entries, expected {len(rows[0])}", lineno)
        if not all(math.isfinite(v) for v in values):
            raise ParseError("non-finite entry", lineno)
        rows.append(values)
    if not rows:
        raise ParseError("no matrix rows found", 1)
    return np.asarray(rows, dtype=float)


def _read_json_matrix(text: str) -> np.ndarray:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from exc
    if isinstance(obj, dict):
        keys = [k for k in ("gram", "inputs", "matrix") if k in obj]
        if len(keys) != 1:
            raise ParseError("expected exactly one of 'gram', 'inputs', 'matrix'", 1)
        obj = obj[keys[0]]
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError("expected a non-empty list of rows", 1)
    width = len(obj[0])
    for i, row in enumerate(obj):
        if len(row) != width or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in row):
            raise ParseError(f"row {i} is ragged or non-numeric", 1, {"row": i})
    return np.asarray(obj, dtype=float)


def read_matrix(path: str) -> np.ndarray:
    """Rows of a CSV ('#' comments allowed) or JSON file; malformed rows raise ParseError."""
    try:
        with open(path, "r", encoding="utf-8-sig") as f:
            text = f.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}", 0, {"path": path}) from exc
    if path.lower().endswith(".json"):
        return _read_json_matrix(text)
    return _read_csv_matrix(text)
