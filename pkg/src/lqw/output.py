"""Tabular output for experiment results.

CSV column sets are a frozen contract (headers below); floats print with 17
significant digits so values round-trip exactly. The JSON variants carry the
same rows as arrays of objects under identical keys. Booleans serialize as
true/false in both formats.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .experiments import AggregateRow, RunRecord, ScanPoint

EVOLUTION_HEADER = "t,p"
SCAN_HEADER = "l,p_peak,t_peak"
RUNS_HEADER = "m,run,seed,l,p_peak,t_peak,grew"
AGGREGATE_HEADER = "m,mean_p,std_p,min_p,max_p,ci_p,mean_t,std_t,ci_t"


def fmt(value) -> str:
    """One CSV cell: bools as true/false, floats with 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.17g}"


def _rows_evolution(series: Sequence[float]) -> list[list]:
    return [[t, float(p)] for t, p in enumerate(series)]


def _rows_scan(points: Iterable[ScanPoint]) -> list[list]:
    return [[pt.l, pt.p_peak, pt.t_peak] for pt in points]


def _rows_runs(records: Iterable[RunRecord]) -> list[list]:
    return [
        [r.m, r.run, r.seed, r.l, r.p_peak, r.t_peak, r.grew] for r in records
    ]


def _rows_aggregate(rows: Iterable[AggregateRow]) -> list[list]:
    return [
        [a.m, a.mean_p, a.std_p, a.min_p, a.max_p, a.ci_p, a.mean_t, a.std_t, a.ci_t]
        for a in rows
    ]


def _write_csv(path, header: str, rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="\n") as stream:
        stream.write(header + "\n")
        for row in rows:
            stream.write(",".join(fmt(cell) for cell in row) + "\n")


def _write_json(path, header: str, rows: Iterable[Sequence]) -> None:
    keys = header.split(",")
    payload = [
        {k: (bool(v) if isinstance(v, (bool, np.bool_)) else v)
         for k, v in zip(keys, row)}
        for row in rows
    ]
    with open(path, "w", newline="\n") as stream:
        json.dump(payload, stream, indent=2)
        stream.write("\n")


def _write(path, header: str, rows: list[list], format: str) -> None:
    if format == "csv":
        _write_csv(path, header, rows)
    elif format == "json":
        _write_json(path, header, rows)
    else:
        raise ValueError(f"unknown output format {format!r}")


def write_evolution(path, series, format: str = "csv") -> None:
    """Success-probability series, one row per step from t=0."""
    _write(path, EVOLUTION_HEADER, _rows_evolution(series), format)


def write_scan(path, points, format: str = "csv") -> None:
    """Weight-scan table in evaluation order."""
    _write(path, SCAN_HEADER, _rows_scan(points), format)


def write_runs(path, records, format: str = "csv") -> None:
    """Per-run ensemble records, expected sorted by (m, run)."""
    _write(path, RUNS_HEADER, _rows_runs(records), format)


def write_aggregate(path, rows, format: str = "csv") -> None:
    """Per-m aggregate statistics."""
    _write(path, AGGREGATE_HEADER, _rows_aggregate(rows), format)


def write_sidecar(out_path, payload: dict) -> Path:
    """Provenance JSON next to an output file: <out>.config.json."""
    sidecar = Path(str(out_path) + ".config.json")
    with open(sidecar, "w", newline="\n") as stream:
        json.dump(payload, stream, indent=2, sort_keys=True)
        stream.write("\n")
    return sidecar
