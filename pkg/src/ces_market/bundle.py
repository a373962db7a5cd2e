"""Result-bundle serialization: one schema-versioned `results.json` plus
fixed-column CSV tables (documented in FORMATS.md). All files are written
atomically and deterministically: identical results give identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path

import numpy as np

__all__ = ["SCHEMA_VERSION", "plain", "write_json", "write_csv", "schedule_rows"]

SCHEMA_VERSION = 1


def plain(value):
    """Recursively convert to JSON-ready python types with floats rounded
    to 12 significant digits (stable, human-diffable output)."""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [plain(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if value != value or value in (float("inf"), float("-inf")):
            return None
        return float(f"{value:.12g}")
    return value


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(data)
    os.replace(tmp, path)


def write_json(path: str | Path, payload: dict) -> None:
    body = json.dumps(plain(payload), indent=2, sort_keys=True) + "\n"
    _atomic_write(Path(path), body)


def _fmt(value) -> str:
    if isinstance(value, (np.floating, float)):
        return f"{float(value):.10g}"
    if isinstance(value, (np.bool_, bool)):
        return "1" if value else "0"
    return str(value)


def write_csv(path: str | Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _atomic_write(Path(path), buf.getvalue())


def schedule_rows(model: str, names: list[str], schedule) -> list[list]:
    """Long-format dispatch rows: model, building, scenario, period, flows."""
    rows = []
    n, omega, periods = schedule.shape
    for i in range(n):
        for w in range(omega):
            for t in range(periods):
                rows.append([
                    model, names[i], w, t,
                    schedule.p_ch[i, w, t], schedule.p_dis[i, w, t],
                    schedule.e[i, w, t],
                    schedule.p_gplus[i, w, t], schedule.p_gminus[i, w, t],
                ])
    return rows
