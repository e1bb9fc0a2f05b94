"""Command-line front end: simulate | scan | ensemble.

Each subcommand writes tabular results to --out (CSV by default, JSON with
--format json), drops a provenance sidecar <out>.config.json, and prints a
one-line JSON summary to standard output. All randomness is seeded, and
ensemble output is identical for any --threads value.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .experiments import (
    SCHEDULE_RULES,
    WeightSchedule,
    evolve_series,
    find_first_peak,
    find_optimal_weight,
    peak_of_series,
    random_marked_set,
    run_ensemble,
    scan_weight,
)
from .grids import GridGeometry, GridKind
from .output import (
    write_aggregate,
    write_evolution,
    write_runs,
    write_scan,
    write_sidecar,
)
from .walk import MarkedSet

MARKED_PATTERNS = ("random", "row-even")
_VERTEX_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


class ConfigError(Exception):
    """Invalid configuration; carries the offending field name."""

    def __init__(self, field: str, message: str):
        super().__init__(message)
        self.field = field
        self.message = message


@dataclass
class RunConfig:
    """Resolved invocation, echoed verbatim into the sidecar."""

    command: str
    grid: str
    side: int
    out: str
    format: str
    seed: int
    threads: int
    marked: str | None = None
    m: int | None = None
    l: float | None = None
    schedule: str | None = None
    steps: int | None = None
    l_list: str | None = None
    l_range: str | None = None
    optimize: bool = False
    m_list: str | None = None
    m_fraction: float | None = None
    R: int | None = None

    def payload(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def make_geometry(args) -> GridGeometry:
    try:
        return GridGeometry(GridKind(args.grid), args.side)
    except ValueError as exc:
        raise ConfigError("--side", str(exc)) from None


def parse_marked(args, geometry: GridGeometry) -> MarkedSet:
    """Marked-set spec: explicit "(x,y);(x,y)", "random", or "row-even"."""
    spec = args.marked.strip()
    if spec == "random":
        if args.m is None:
            raise ConfigError("--m", "marked spec 'random' needs --m")
        try:
            return random_marked_set(geometry, args.m, args.seed)
        except ValueError as exc:
            raise ConfigError("--m", str(exc)) from None
    if spec == "row-even":
        if args.m is None:
            raise ConfigError("--m", "marked spec 'row-even' needs --m")
        if args.m < 0:
            raise ConfigError("--m", f"marked count {args.m} is negative")
        if args.m and 2 * (args.m - 1) >= geometry.side:
            raise ConfigError(
                "--m",
                f"row-even pattern with m={args.m} leaves the grid "
                f"(needs 2(m-1) < side = {geometry.side})",
            )
        return MarkedSet((0, 2 * i) for i in range(args.m))
    if not spec:
        return MarkedSet()
    matches = _VERTEX_RE.findall(spec)
    leftover = _VERTEX_RE.sub("", spec).replace(";", "").strip()
    if not matches or leftover:
        raise ConfigError(
            "--marked",
            f"cannot parse {args.marked!r}; expected \"(x,y);(x,y);...\", "
            f"\"random\", or \"row-even\"",
        )
    vertices = [(int(x), int(y)) for x, y in matches]
    for x, y in vertices:
        if not (0 <= x < geometry.side and 0 <= y < geometry.side):
            raise ConfigError(
                "--marked",
                f"vertex ({x},{y}) out of range for side {geometry.side}",
            )
    return MarkedSet(vertices)


def parse_schedule(text: str) -> WeightSchedule:
    try:
        return WeightSchedule.parse(text)
    except ValueError as exc:
        raise ConfigError("--schedule", str(exc)) from None


def resolve_weight(args, geometry: GridGeometry, marked: MarkedSet) -> float:
    if (args.l is None) == (args.schedule is None):
        raise ConfigError("--l/--schedule", "exactly one weight spec required")
    if args.l is not None:
        if args.l < 0:
            raise ConfigError("--l", f"self-loop weight must be >= 0, got {args.l}")
        return args.l
    return parse_schedule(args.schedule).weight(geometry, marked.m)


def parse_l_values(args) -> np.ndarray:
    given = [
        opt
        for opt, value in (
            ("--l-list", args.l_list),
            ("--l-range", args.l_range),
            ("--optimize", args.optimize or None),
        )
        if value
    ]
    if len(given) != 1:
        raise ConfigError(
            "--l-list/--l-range/--optimize", "exactly one weight spec required"
        )
    if args.optimize:
        return np.empty(0)
    if args.l_list is not None:
        try:
            values = np.array([float(tok) for tok in args.l_list.split(",")])
        except ValueError:
            raise ConfigError("--l-list", f"cannot parse {args.l_list!r}") from None
        if values.size == 0:
            raise ConfigError("--l-list", "empty weight list")
    else:
        parts = args.l_range.split(":")
        if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "log"):
            raise ConfigError(
                "--l-range", f"expected lo:hi:count[:log], got {args.l_range!r}"
            )
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError("--l-range", f"cannot parse {args.l_range!r}") from None
        if count < 1:
            raise ConfigError("--l-range", "count must be at least 1")
        if len(parts) == 4:
            if lo <= 0:
                raise ConfigError("--l-range", "log spacing needs lo > 0")
            values = np.geomspace(lo, hi, count)
        else:
            values = np.linspace(lo, hi, count)
    if np.any(values < 0):
        raise ConfigError("--l-list", "self-loop weights must be >= 0")
    return values


def parse_m_values(args, geometry: GridGeometry) -> list[int]:
    if (args.m_list is None) == (args.m_fraction is None):
        raise ConfigError(
            "--m-list/--m-fraction", "exactly one marked-count spec required"
        )
    n = geometry.vertex_count
    if args.m_fraction is not None:
        if not 0 < args.m_fraction <= 1:
            raise ConfigError(
                "--m-fraction", f"fraction must be in (0, 1], got {args.m_fraction}"
            )
        m = round(args.m_fraction * n)
        if m < 1:
            raise ConfigError(
                "--m-fraction", f"fraction {args.m_fraction} rounds to zero vertices"
            )
        return [m]
    text = args.m_list.strip()
    try:
        if ".." in text:
            head, _, tail = text.partition("..")
            lo = int(head)
            parts = tail.split(":")
            hi = int(parts[0])
            if lo < 1 or hi < lo:
                raise ValueError(f"need 1 <= lo <= hi, got {lo}..{hi}")
            if len(parts) == 1:
                values = list(range(lo, hi + 1))
            else:
                spacing = parts[1]
                count = int(parts[2]) if len(parts) > 2 else 10
                if len(parts) > 3 or spacing not in ("log", "lin"):
                    raise ValueError("expected a..b[:log|:lin[:count]]")
                if count < 1:
                    raise ValueError("count must be at least 1")
                grid = (
                    np.geomspace(lo, hi, count)
                    if spacing == "log"
                    else np.linspace(lo, hi, count)
                )
                values = sorted({int(round(v)) for v in grid})
        else:
            values = [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError("--m-list", f"cannot parse {args.m_list!r}: {exc}") from None
    if not values:
        raise ConfigError("--m-list", "empty marked-count list")
    for m in values:
        if not 1 <= m <= n:
            raise ConfigError("--m-list", f"marked count {m} outside [1, {n}]")
    return values


def resolve_threads(args) -> int:
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads", f"need at least 1 thread, got {args.threads}")
        return args.threads
    env = os.environ.get("LQW_THREADS")
    if env:
        try:
            threads = int(env)
        except ValueError:
            raise ConfigError("LQW_THREADS", f"not an integer: {env!r}") from None
        if threads < 1:
            raise ConfigError("LQW_THREADS", f"need at least 1 thread, got {threads}")
        return threads
    return os.cpu_count() or 1


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary) + "\n")


def cmd_simulate(args) -> int:
    geometry = make_geometry(args)
    marked = parse_marked(args, geometry)
    l = resolve_weight(args, geometry, marked)
    threads = resolve_threads(args)
    if args.steps is not None:
        if args.steps < 0:
            raise ConfigError("--steps", f"step count must be >= 0, got {args.steps}")
        record = evolve_series(geometry, marked, l, args.steps, seed=args.seed)
        peak = peak_of_series(record)
    elif marked.m == 0:
        raise ConfigError(
            "--steps", "an empty marked set has no peak; give --steps explicitly"
        )
    else:
        peak, record = find_first_peak(geometry, marked, l, seed=args.seed)
    write_evolution(args.out, record.series, args.format)
    config = RunConfig(
        command="simulate",
        grid=args.grid,
        side=args.side,
        out=args.out,
        format=args.format,
        seed=args.seed,
        threads=threads,
        marked=args.marked,
        m=marked.m,
        l=l,
        schedule=args.schedule,
        steps=args.steps,
    )
    sidecar = write_sidecar(
        args.out,
        {
            "version": __version__,
            "config": config.payload(),
            "seeds": {"seed": args.seed},
            "marked_vertices": [list(v) for v in marked],
        },
    )
    _emit(
        {
            "command": "simulate",
            "grid": args.grid,
            "side": args.side,
            "N": geometry.vertex_count,
            "m": marked.m,
            "l": l,
            "steps": len(record.series) - 1,
            "t_peak": peak.t_peak,
            "p_peak": peak.p_peak,
            "grew": peak.grew,
            "out": str(args.out),
            "sidecar": str(sidecar),
        }
    )
    return 0


def cmd_scan(args) -> int:
    geometry = make_geometry(args)
    marked = parse_marked(args, geometry)
    if marked.m == 0:
        raise ConfigError("--marked", "weight scans need at least one marked vertex")
    l_values = parse_l_values(args)
    threads = resolve_threads(args)
    summary: dict = {
        "command": "scan",
        "grid": args.grid,
        "side": args.side,
        "N": geometry.vertex_count,
        "m": marked.m,
    }
    if args.optimize:
        best = find_optimal_weight(geometry, marked)
        points = list(best.points)
        summary.update(
            {"l_opt": best.l_opt, "p_peak": best.p_peak, "t_peak": best.t_peak}
        )
    else:
        points = scan_weight(geometry, marked, l_values)
        top = max(points, key=lambda pt: pt.p_peak)
        summary.update(
            {"best": {"l": top.l, "p_peak": top.p_peak, "t_peak": top.t_peak}}
        )
    write_scan(args.out, points, args.format)
    config = RunConfig(
        command="scan",
        grid=args.grid,
        side=args.side,
        out=args.out,
        format=args.format,
        seed=args.seed,
        threads=threads,
        marked=args.marked,
        m=marked.m,
        l_list=args.l_list,
        l_range=args.l_range,
        optimize=args.optimize,
    )
    sidecar = write_sidecar(
        args.out,
        {
            "version": __version__,
            "config": config.payload(),
            "seeds": {"seed": args.seed},
            "marked_vertices": [list(v) for v in marked],
        },
    )
    summary.update({"points": len(points), "out": str(args.out), "sidecar": str(sidecar)})
    _emit(summary)
    return 0


def aggregate_path(out) -> Path:
    path = Path(out)
    return path.with_name(path.stem + "-aggregate" + path.suffix)


def cmd_ensemble(args) -> int:
    geometry = make_geometry(args)
    m_values = parse_m_values(args, geometry)
    if args.R < 1:
        raise ConfigError("--R", f"ensemble size must be >= 1, got {args.R}")
    schedule = parse_schedule(args.schedule)
    threads = resolve_threads(args)
    stats = run_ensemble(geometry, m_values, args.R, schedule, args.seed, threads)
    write_runs(args.out, stats.runs, args.format)
    agg_out = aggregate_path(args.out)
    write_aggregate(agg_out, stats.rows, args.format)
    config = RunConfig(
        command="ensemble",
        grid=args.grid,
        side=args.side,
        out=args.out,
        format=args.format,
        seed=args.seed,
        threads=threads,
        schedule=args.schedule,
        m_list=args.m_list,
        m_fraction=args.m_fraction,
        R=args.R,
    )
    sidecar = write_sidecar(
        args.out,
        {
            "version": __version__,
            "config": config.payload(),
            "seeds": {
                "base_seed": args.seed,
                "run_seeds": [args.seed + r for r in range(args.R)],
            },
            "m_values": m_values,
        },
    )
    _emit(
        {
            "command": "ensemble",
            "grid": args.grid,
            "side": args.side,
            "N": geometry.vertex_count,
            "m_values": m_values,
            "R": args.R,
            "schedule": args.schedule,
            "runs": len(stats.runs),
            "aggregate": [
                {
                    "m": row.m,
                    "mean_p": row.mean_p,
                    "mean_t": row.mean_t,
                }
                for row in stats.rows
            ],
            "out": str(args.out),
            "aggregate_out": str(agg_out),
            "sidecar": str(sidecar),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lqw",
        description=(
            "Self-loop weighted quantum walk search on triangular, "
            "rectangular, and honeycomb torus grids."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument(
            "--grid",
            required=True,
            choices=[kind.value for kind in GridKind],
            help="grid kind",
        )
        p.add_argument("--side", required=True, type=int, help="grid side (sqrt N)")
        p.add_argument("--seed", type=int, default=0, help="base random seed")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument(
            "--threads",
            type=int,
            default=None,
            help="worker threads (default: LQW_THREADS or all cores)",
        )
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    sim = sub.add_parser(
        "simulate", help="evolve one configuration and record p(t)"
    )
    add_common(sim)
    sim.add_argument(
        "--marked",
        required=True,
        help='"(x,y);(x,y);..." | "random" | "row-even" ("" for none)',
    )
    sim.add_argument("--m", type=int, default=None, help="marked count for patterns")
    sim.add_argument("--l", type=float, default=None, help="explicit self-loop weight")
    sim.add_argument(
        "--schedule",
        default=None,
        help=f"weight rule l = a d/N, a in {SCHEDULE_RULES} or a number",
    )
    sim.add_argument(
        "--steps", type=int, default=None, help="fixed step count (default: auto stop)"
    )
    sim.set_defaults(func=cmd_simulate)

    scan = sub.add_parser("scan", help="sweep the self-loop weight")
    add_common(scan)
    scan.add_argument("--marked", required=True)
    scan.add_argument("--m", type=int, default=None)
    scan.add_argument("--l-list", default=None, help='comma list, e.g. "0,0.02,0.1"')
    scan.add_argument("--l-range", default=None, help="lo:hi:count[:log]")
    scan.add_argument(
        "--optimize", action="store_true", help="two-stage search for the best weight"
    )
    scan.set_defaults(func=cmd_scan)

    ens = sub.add_parser("ensemble", help="randomized runs over marked-set sizes")
    add_common(ens)
    ens.add_argument(
        "--m-list", default=None, help='"1,2,5" | "a..b" | "a..b:log[:count]"'
    )
    ens.add_argument(
        "--m-fraction",
        type=float,
        default=None,
        help="mark this fraction of all vertices",
    )
    ens.add_argument("--R", type=int, required=True, help="runs per marked-set size")
    ens.add_argument(
        "--schedule",
        required=True,
        help=f"weight rule l = a d/N, a in {SCHEDULE_RULES} or a number",
    )
    ens.set_defaults(func=cmd_ensemble)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc.field}: {exc.message}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
