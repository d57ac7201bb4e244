"""Serialization helpers: CSV/dat tables, time ranges, JSON config and schedules."""
from __future__ import annotations

import csv
import json
import math
from typing import Iterable, Mapping, Sequence, TextIO


def format_value(x) -> str:
    """9 significant digits for floats; empty string for missing values."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return ""
    return format(x, ".9g")


def write_csv(rows: Iterable[Mapping], columns: Sequence[str], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])


def write_dat(rows: Iterable[Mapping], columns: Sequence[str], stream: TextIO) -> None:
    """Whitespace-separated columns with a '#' header, for gnuplot-style tools."""
    stream.write("# " + " ".join(columns) + "\n")
    for row in rows:
        stream.write(" ".join(format_value(row.get(c)) for c in columns) + "\n")


def parse_tau_range(spec: str) -> list[float]:
    """'start:stop:step', inclusive of stop when it lands on the grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"tau range must be start:stop:step, got {spec!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ValueError(f"tau range has a non-numeric field: {spec!r}") from None
    if not all(math.isfinite(v) for v in (start, stop, step)):
        raise ValueError(f"tau range must be finite: {spec!r}")
    if step <= 0:
        raise ValueError("tau range step must be > 0")
    if stop < start:
        raise ValueError("tau range stop must be >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


def parse_float_list(spec: str) -> list[float]:
    try:
        values = [float(v) for v in spec.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"expected comma-separated numbers, got {spec!r}") from None
    if not values:
        raise ValueError("empty number list")
    return values


def load_config(path: str, allowed: Iterable[str]) -> dict:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return data


def load_schedule(path: str) -> dict:
    """JSON object with tau0 and a list of per-iteration times 'taus' (n optional)."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict) or "tau0" not in data or "taus" not in data:
        raise ValueError(f"schedule {path} needs 'tau0' and 'taus' keys")
    return {"n": data.get("n"), "tau0": float(data["tau0"]), "taus": [float(t) for t in data["taus"]]}
