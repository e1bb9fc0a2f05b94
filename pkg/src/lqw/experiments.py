"""Experiment harness: peak detection, weight scans, ensembles, scaling fits.

Everything here is deterministic given its inputs. Randomized pieces take an
explicit integer seed; ensemble runs derive per-run seeds as base_seed + run
index so results are independent of execution order and thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .grids import GridGeometry
from .walk import MarkedSet, initial_state, step, success_probability

# first-peak stopping rule
PEAK_WINDOW = 10
CAP_MULTIPLE = 6.0
CAP_SLACK = 20

# probability improvements below this are numerical jitter, not signal
PEAK_JITTER = 1e-11

# a peak "grew" if it beats this multiple of the initial probability m/N
GROWTH_FACTOR = 2.0

# 95% confidence half-width factor
CI_Z = 1.96

SCHEDULE_RULES = ("1", "m-sqrtm", "m")


@dataclass(frozen=True)
class WeightSchedule:
    """Self-loop weight rule l = a * d / N.

    The named rules tie the coefficient to the marked-set size: "1" gives
    a = 1, "m-sqrtm" gives a = m - sqrt(m) (kept real, no rounding), "m"
    gives a = m. Rule "fixed-a" uses the stored coefficient for every m.
    """

    rule: str
    a: float | None = None

    def __post_init__(self):
        if self.rule == "fixed-a":
            if self.a is None or self.a < 0:
                raise ValueError("fixed-a schedule needs a coefficient a >= 0")
        elif self.rule not in SCHEDULE_RULES:
            raise ValueError(
                f"unknown schedule rule {self.rule!r}; "
                f"expected one of {SCHEDULE_RULES} or 'fixed-a'"
            )
        elif self.a is not None:
            raise ValueError(f"rule {self.rule!r} does not take a coefficient")

    @classmethod
    def parse(cls, text: str) -> "WeightSchedule":
        """Named rule, or a bare number meaning a fixed coefficient."""
        token = text.strip()
        if token in SCHEDULE_RULES:
            return cls(token)
        try:
            return cls("fixed-a", float(token))
        except ValueError:
            raise ValueError(
                f"schedule must be one of {SCHEDULE_RULES} or a number, got {text!r}"
            ) from None

    def coefficient(self, m: int) -> float:
        if self.rule == "1":
            return 1.0
        if self.rule == "m-sqrtm":
            return m - math.sqrt(m)
        if self.rule == "m":
            return float(m)
        return float(self.a)

    def weight(self, geometry: GridGeometry, m: int) -> float:
        return self.coefficient(m) * geometry.degree / geometry.vertex_count


@dataclass(frozen=True)
class PeakResult:
    """First maximum of the success probability and whether it grew.

    grew is False when the peak never exceeded GROWTH_FACTOR * m/N, the
    signature of an exceptional marked configuration.
    """

    t_peak: int
    p_peak: float
    grew: bool


@dataclass(frozen=True)
class EvolutionRecord:
    """Success-probability series p(t) for t = 0..len(series)-1."""

    geometry: GridGeometry
    marked: MarkedSet
    l: float
    seed: int | None
    series: np.ndarray


@dataclass(frozen=True)
class ScanPoint:
    l: float
    p_peak: float
    t_peak: int


@dataclass(frozen=True)
class OptimalWeight:
    """Refined scan optimum; iterable as (l_opt, p_peak)."""

    l_opt: float
    p_peak: float
    t_peak: int
    points: tuple[ScanPoint, ...]

    def __iter__(self):
        yield self.l_opt
        yield self.p_peak


@dataclass(frozen=True)
class RunRecord:
    """One ensemble run: the sampled instance and its first peak."""

    m: int
    run: int
    seed: int
    l: float
    p_peak: float
    t_peak: int
    grew: bool


@dataclass(frozen=True)
class AggregateRow:
    """Per-m statistics of p_peak and t_peak over R runs.

    std is the population standard deviation (a single run has std 0);
    ci_* is the 95% half-width CI_Z * std / sqrt(R).
    """

    m: int
    mean_p: float
    std_p: float
    min_p: float
    max_p: float
    ci_p: float
    mean_t: float
    std_t: float
    ci_t: float
    min_t: int
    max_t: int


@dataclass(frozen=True)
class AggregateStats:
    """Sorted per-run records plus their per-m aggregate rows."""

    runs: tuple[RunRecord, ...]
    rows: tuple[AggregateRow, ...]


def max_step_cap(geometry: GridGeometry, m: int) -> int:
    """Hard evolution cap ceil(6 sqrt((N/m) ln(N/m))) + 20."""
    ratio = geometry.vertex_count / m
    return math.ceil(CAP_MULTIPLE * math.sqrt(ratio * math.log(ratio))) + CAP_SLACK


def evolve_series(
    geometry: GridGeometry,
    marked: MarkedSet,
    l: float,
    steps: int,
    seed: int | None = None,
) -> EvolutionRecord:
    """Fixed-length evolution: p(t) for t = 0..steps."""
    if steps < 0:
        raise ValueError("step count must be non-negative")
    state = initial_state(geometry, l)
    series = [success_probability(state, marked)]
    for _ in range(steps):
        step(state, marked, l)
        series.append(success_probability(state, marked))
    return EvolutionRecord(geometry, marked, l, seed, np.array(series))


def peak_of_series(record: EvolutionRecord) -> PeakResult:
    """Peak of a recorded series under the same jitter rule as detection."""
    t_peak, p_peak = _locate_peak(record.series)
    baseline = record.marked.m / record.geometry.vertex_count
    return PeakResult(t_peak, p_peak, p_peak > GROWTH_FACTOR * baseline)


def _locate_peak(series: np.ndarray) -> tuple[int, float]:
    """Maximum of the series and the first index attaining it.

    Improvements within PEAK_JITTER of the maximum count as attaining it, so
    accumulated rounding noise cannot push t_peak past the true plateau.
    """
    p_peak = float(series.max())
    t_peak = int(np.argmax(series >= p_peak - PEAK_JITTER))
    return t_peak, p_peak


def find_first_peak(
    geometry: GridGeometry,
    marked: MarkedSet,
    l: float,
    seed: int | None = None,
    max_steps: int | None = None,
) -> tuple[PeakResult, EvolutionRecord]:
    """Evolve until the success probability stops improving, return its peak.

    Runs the search step from the uniform initial state, tracking the running
    maximum of p(t). Stops once PEAK_WINDOW consecutive steps fail to exceed
    it by more than PEAK_JITTER, or at max_steps (default max_step_cap).
    t_peak is the first index attaining the maximum.
    """
    if marked.m == 0:
        raise ValueError("first peak undefined for an empty marked set")
    cap = max_step_cap(geometry, marked.m) if max_steps is None else max_steps
    state = initial_state(geometry, l)
    p = success_probability(state, marked)
    series = [p]
    best_p = p
    last_improvement = 0
    t = 0
    while t < cap:
        t += 1
        step(state, marked, l)
        p = success_probability(state, marked)
        series.append(p)
        if p > best_p + PEAK_JITTER:
            best_p = p
            last_improvement = t
        elif t - last_improvement >= PEAK_WINDOW:
            break
    record = EvolutionRecord(geometry, marked, l, seed, np.array(series))
    t_peak, p_peak = _locate_peak(record.series)
    baseline = marked.m / geometry.vertex_count
    peak = PeakResult(t_peak, p_peak, p_peak > GROWTH_FACTOR * baseline)
    return peak, record


def scan_weight(
    geometry: GridGeometry, marked: MarkedSet, l_grid: Iterable[float]
) -> list[ScanPoint]:
    """First peak for each weight in l_grid, in the given order."""
    points = []
    for l in l_grid:
        peak, _ = find_first_peak(geometry, marked, float(l))
        points.append(ScanPoint(float(l), peak.p_peak, peak.t_peak))
    return points


def find_optimal_weight(geometry: GridGeometry, marked: MarkedSet) -> OptimalWeight:
    """Locate the weight maximizing the peak probability by a two-stage scan.

    Coarse stage: 50 log-spaced weights in [d/(10N), 100 d m / N]. Refine
    stage: 20 linear weights between the coarse neighbors of the best coarse
    point. Returns the argmax over everything evaluated.
    """
    if marked.m == 0:
        raise ValueError("optimal weight undefined for an empty marked set")
    d = geometry.degree
    n = geometry.vertex_count
    coarse = np.geomspace(d / (10 * n), 100 * d * marked.m / n, 50)
    points = scan_weight(geometry, marked, coarse)
    best = max(range(len(points)), key=lambda i: points[i].p_peak)
    lo = coarse[max(best - 1, 0)]
    hi = coarse[min(best + 1, len(coarse) - 1)]
    fine = np.linspace(lo, hi, 20)
    points.extend(scan_weight(geometry, marked, fine))
    top = max(points, key=lambda pt: pt.p_peak)
    return OptimalWeight(top.l, top.p_peak, top.t_peak, tuple(points))


def random_marked_set(geometry: GridGeometry, m: int, seed: int) -> MarkedSet:
    """Uniform sample of m distinct vertices; same inputs, same set."""
    n = geometry.vertex_count
    if not 0 <= m <= n:
        raise ValueError(f"marked count {m} outside [0, {n}]")
    rng = np.random.default_rng(seed)
    rows = rng.choice(n, size=m, replace=False)
    return MarkedSet(geometry.vertex_at(int(r)) for r in rows)


def _aggregate(m: int, group: Sequence[RunRecord]) -> AggregateRow:
    p = np.array([r.p_peak for r in group])
    t = np.array([r.t_peak for r in group], dtype=float)
    root_r = math.sqrt(len(group))
    return AggregateRow(
        m=m,
        mean_p=float(p.mean()),
        std_p=float(p.std()),
        min_p=float(p.min()),
        max_p=float(p.max()),
        ci_p=CI_Z * float(p.std()) / root_r,
        mean_t=float(t.mean()),
        std_t=float(t.std()),
        ci_t=CI_Z * float(t.std()) / root_r,
        min_t=int(t.min()),
        max_t=int(t.max()),
    )


def run_ensemble(
    geometry: GridGeometry,
    m_values: Iterable[int],
    R: int,
    schedule: WeightSchedule,
    base_seed: int,
    threads: int = 1,
) -> AggregateStats:
    """R randomized runs per marked-set size, with per-m statistics.

    Run r of every m uses the marked set drawn with seed base_seed + r and
    the schedule's weight for that m. Tasks are independent; records are
    sorted by (m, run) so the output never depends on scheduling.
    """
    if R < 1:
        raise ValueError("ensemble size R must be at least 1")
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    sizes = sorted(set(int(m) for m in m_values))
    if not sizes:
        raise ValueError("no marked-set sizes given")
    n = geometry.vertex_count
    for m in sizes:
        if not 1 <= m <= n:
            raise ValueError(f"marked count {m} outside [1, {n}]")

    def one(task: tuple[int, int]) -> RunRecord:
        m, run = task
        seed = base_seed + run
        marked = random_marked_set(geometry, m, seed)
        l = schedule.weight(geometry, m)
        peak, _ = find_first_peak(geometry, marked, l, seed=seed)
        return RunRecord(m, run, seed, l, peak.p_peak, peak.t_peak, peak.grew)

    tasks = [(m, run) for m in sizes for run in range(R)]
    if threads == 1:
        records = [one(task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(one, tasks))
    records.sort(key=lambda r: (r.m, r.run))
    rows = [
        _aggregate(m, [r for r in records if r.m == m])
        for m in sizes
    ]
    return AggregateStats(tuple(records), tuple(rows))


def scaling_reference(N: int, m: int) -> float:
    """Reference step count sqrt((N/m) ln(N/m)) (natural log)."""
    if m < 1 or m >= N:
        raise ValueError(f"need N > m >= 1, got N={N}, m={m}")
    ratio = N / m
    return math.sqrt(ratio * math.log(ratio))


def fit_loglog_slope(points: Iterable[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares slope and intercept of ln(value) against ln(m)."""
    pts = [(float(m), float(v)) for m, v in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(m <= 0 or v <= 0 for m, v in pts):
        raise ValueError("log-log fit needs positive coordinates")
    x = np.log([m for m, _ in pts])
    y = np.log([v for _, v in pts])
    if np.ptp(x) == 0:
        raise ValueError("all abscissae equal; slope undefined")
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)
