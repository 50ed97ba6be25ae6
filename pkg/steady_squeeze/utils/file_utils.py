"""File handling utilities."""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import numpy as np
import pandas as pd

from steady_squeeze.config.constants import CSV_FLOAT_FORMAT

UNDEFINED = "undefined"


def ensure_output_dir(directory: str | Path) -> Path:
    """Create an output directory with its parents; PermissionError if it cannot be written."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise PermissionError(f"Output directory {path} is not writable")
    return path


def ensure_parent_dir(file_path: str | Path) -> Path:
    """Create the directory holding file_path and return the path."""
    path = Path(file_path)
    ensure_output_dir(path.parent)
    return path


def _header_value(value) -> str:
    if isinstance(value, (list, tuple)):
        return ",".join(_header_value(v) for v in value)
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT % value
    return str(value)


def write_csv(frame: pd.DataFrame, file_path: str | Path, header: dict | None = None) -> Path:
    """Write rows after a '# key=value' comment block; NaN cells become 'undefined'."""
    path = ensure_parent_dir(file_path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for key, value in (header or {}).items():
            handle.write(f"# {key}={_header_value(value)}\n")
        frame.to_csv(
            handle, index=False, float_format=CSV_FLOAT_FORMAT, na_rep=UNDEFINED, lineterminator="\n"
        )
    return path


def read_csv(file_path: str | Path) -> tuple[dict, pd.DataFrame]:
    """Inverse of write_csv: (header, rows)."""
    header = {}
    with open(file_path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            header[key.strip()] = value
    frame = pd.read_csv(
        file_path, comment="#", na_values=[UNDEFINED], keep_default_na=False, float_precision="round_trip"
    )
    return header, frame


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return {"re": value.real, "im": value.imag}
    return value


def write_json_report(data: dict, file_path: str | Path) -> Path:
    """JSON with non-finite numbers written as null."""
    path = ensure_parent_dir(file_path)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(_jsonable(data), handle, indent=2)
        handle.write("\n")
    return path
