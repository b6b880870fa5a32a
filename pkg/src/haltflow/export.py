"""Trajectory files: CSV with a header row, or JSON lines with the same fields."""

from __future__ import annotations

import csv
import json
from pathlib import Path

FORMATS = ("csv", "jsonl")


def write_trajectory(path, columns: list[str], rows: list[list[float]], fmt: str = "csv") -> None:
    path = Path(path)
    if fmt == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(columns)
            for r in rows:
                w.writerow([repr(float(v)) for v in r])
    elif fmt == "jsonl":
        with path.open("w", encoding="utf-8") as fh:
            for r in rows:
                fh.write(json.dumps(dict(zip(columns, map(float, r)))) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}; choose from {FORMATS}")


def read_trajectory(path, fmt: str | None = None) -> tuple[list[str], list[list[float]]]:
    path = Path(path)
    fmt = fmt or ("jsonl" if path.suffix in (".jsonl", ".json") else "csv")
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            columns = next(reader)
            return columns, [[float(v) for v in r] for r in reader]
    columns: list[str] = []
    rows = []
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            d = json.loads(line)
            if not columns:
                columns = list(d)
            rows.append([float(d[c]) for c in columns])
    return columns, rows
