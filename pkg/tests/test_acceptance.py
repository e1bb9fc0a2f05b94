"""Acceptance gate: ten criteria with pinned tolerances and runtime budgets.

Each test prints one line, "criterion <n> <name>: PASS|FAIL (<elapsed>)",
visible with `pytest -s tests/test_acceptance.py`. Budgets are asserted, so
a pathologically slow environment fails loudly rather than silently.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from lqw.cli import main
from lqw.dense import build_step_matrix
from lqw.experiments import (
    WeightSchedule,
    find_first_peak,
    find_optimal_weight,
    fit_loglog_slope,
    run_ensemble,
    scaling_reference,
)
from lqw.grids import GridGeometry, GridKind, build_shift_permutation
from lqw.walk import (
    MarkedSet,
    StateVector,
    apply_coin,
    apply_oracle,
    apply_shift,
    initial_state,
    overlap_with_initial,
    step,
    success_probability,
)

ALL_KINDS = list(GridKind)
M5 = MarkedSet([(0, 0), (0, 2), (0, 4), (0, 6), (0, 8)])


@contextmanager
def criterion(number, name, budget_s=None):
    start = time.perf_counter()
    status = "FAIL"
    try:
        yield
        elapsed = time.perf_counter() - start
        if budget_s is not None and elapsed > budget_s:
            raise AssertionError(
                f"runtime {elapsed:.1f}s exceeds the {budget_s:.0f}s budget"
            )
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - start
        budget = f", budget {budget_s:.0f}s" if budget_s is not None else ""
        print(f"criterion {number:2d} {name}: {status} ({elapsed:.1f}s{budget})")


def test_criterion_01_operator_correctness():
    pattern = [(0, 0), (1, 1), (0, 1)]
    with criterion(1, "operator correctness", budget_s=30):
        for kind in ALL_KINDS:
            for side in (2, 4, 6):
                g = GridGeometry(kind, side)
                d, n = g.degree, g.vertex_count
                for m in range(4):
                    marked = MarkedSet(pattern[:m])
                    for l in sorted({0.0, d / n, m * d / n}):
                        operator = build_step_matrix(g, marked, l)
                        psi = initial_state(g, l).flat().copy()
                        state = initial_state(g, l)
                        for _ in range(50):
                            psi = operator.matrix @ psi
                            step(state, marked, l)
                            assert np.max(np.abs(state.flat() - psi)) <= 1e-10


def test_criterion_02_unitarity_involutions():
    with criterion(2, "unitarity and involutions", budget_s=10):
        g = GridGeometry(GridKind.RECTANGULAR, 16)
        rng = np.random.default_rng(2)
        amps = rng.normal(size=(256, 5)) + 1j * rng.normal(size=(256, 5))
        amps /= np.linalg.norm(amps)
        marked = MarkedSet([(0, 0), (7, 11), (3, 3)])

        state = StateVector(g, amps.copy())
        apply_oracle(state, marked)
        apply_oracle(state, marked)
        assert np.array_equal(state.amplitudes, amps)

        state = StateVector(g, amps.copy())
        apply_shift(state)
        apply_shift(state)
        assert np.array_equal(state.amplitudes, amps)
        perm = build_shift_permutation(g)
        assert np.array_equal(perm[perm], np.arange(perm.size))

        state = StateVector(g, amps.copy())
        apply_coin(state, 0.05)
        apply_coin(state, 0.05)
        assert np.max(np.abs(state.amplitudes - amps)) <= 1e-12

        l = 2 * 4 / 256
        state = initial_state(g, l)
        for _ in range(10_000):
            step(state, marked, l)
        assert abs(state.norm() - 1.0) <= 1e-9


def test_criterion_03_stationarity_without_marks():
    with criterion(3, "stationarity without marks", budget_s=10):
        empty = MarkedSet()
        for kind in ALL_KINDS:
            g = GridGeometry(kind, 24)
            l = g.degree / g.vertex_count
            state = initial_state(g, l)
            for _ in range(1000):
                step(state, empty, l)
                assert abs(overlap_with_initial(state, l)) >= 1 - 1e-9


def test_criterion_04_initial_probability():
    with criterion(4, "initial probability m/N"):
        for kind in ALL_KINDS:
            g = GridGeometry(kind, 24)
            state = initial_state(g, g.degree / g.vertex_count)
            assert abs(success_probability(state, M5) - 5 / 576) <= 1e-12


def test_criterion_05_optimal_weight():
    targets = {
        GridKind.TRIANGULAR: 0.0490,
        GridKind.RECTANGULAR: 0.0339,
        GridKind.HONEYCOMB: 0.0207,
    }
    with criterion(5, "optimal self-loop weight", budget_s=300):
        rect_opt = None
        for kind, target in targets.items():
            g = GridGeometry(kind, 24)
            best = find_optimal_weight(g, M5)
            assert abs(best.l_opt - target) / target <= 0.20, (kind, best.l_opt)
            if kind is GridKind.RECTANGULAR:
                rect_opt = best
        g = GridGeometry(GridKind.RECTANGULAR, 24)
        peak_sched, _ = find_first_peak(g, M5, 5 * 4 / 576)
        assert peak_sched.p_peak >= 0.9 * rect_opt.p_peak


def test_criterion_06_schedule_ordering():
    with criterion(6, "schedule ordering", budget_s=600):
        for kind in ALL_KINDS:
            g = GridGeometry(kind, 100)
            for m in (8, 16, 32):
                marked = MarkedSet((0, 2 * i) for i in range(m))
                peaks = {}
                for rule in ("m", "1", "m-sqrtm"):
                    if rule == "m-sqrtm" and m > 8:
                        continue
                    l = WeightSchedule(rule).weight(g, m)
                    peak, _ = find_first_peak(g, marked, l)
                    peaks[rule] = peak.p_peak
                assert peaks["m"] > peaks["1"], (kind, m, peaks)
                if m <= 8:
                    assert peaks["m"] > peaks["m-sqrtm"], (kind, m, peaks)


def test_criterion_07_ensemble_floor():
    with criterion(7, "ensemble success floor", budget_s=1200):
        for kind in ALL_KINDS:
            g = GridGeometry(kind, 100)
            stats = run_ensemble(g, (1, 10, 100, 1000), 20, WeightSchedule("m"), 7)
            means = {row.m: row.mean_p for row in stats.rows}
            for m, mean_p in means.items():
                assert mean_p >= 0.45, (kind, m, mean_p)
            assert means[1] >= 0.9, (kind, means[1])


def test_criterion_08_step_scaling():
    with criterion(8, "step-count scaling", budget_s=1200):
        m_grid = sorted({int(round(v)) for v in np.geomspace(1, 1000, 7)})
        n = 100 * 100
        ref_slope, _ = fit_loglog_slope(
            [(m, scaling_reference(n, m)) for m in m_grid]
        )
        for kind in ALL_KINDS:
            g = GridGeometry(kind, 100)
            stats = run_ensemble(g, m_grid, 10, WeightSchedule("m"), 11)
            slope, _ = fit_loglog_slope(
                [(row.m, row.mean_t) for row in stats.rows]
            )
            tolerance = 0.25 if kind is GridKind.HONEYCOMB else 0.15
            rel = abs(slope - ref_slope) / abs(ref_slope)
            assert rel <= tolerance, (kind, slope, ref_slope, rel)


def test_criterion_09_dense_marking_floor():
    with criterion(9, "dense-marking success floor", budget_s=600):
        for kind in ALL_KINDS:
            for side in (20, 30, 40):
                g = GridGeometry(kind, side)
                m = g.vertex_count // 5
                stats = run_ensemble(g, [m], 10, WeightSchedule("m"), 3)
                assert stats.rows[0].mean_p >= 0.4, (kind, side, stats.rows[0])


def test_criterion_10_thread_determinism(tmp_path, capsys):
    with criterion(10, "thread-count determinism"):
        argv = [
            "ensemble",
            "--grid", "triangular",
            "--side", "30",
            "--m-list", "1..180:log:4",
            "--R", "5",
            "--schedule", "m",
            "--seed", "123",
        ]
        one = tmp_path / "one.csv"
        eight = tmp_path / "eight.csv"
        assert main(argv + ["--threads", "1", "--out", str(one)]) == 0
        assert main(argv + ["--threads", "8", "--out", str(eight)]) == 0
        capsys.readouterr()
        assert one.read_bytes() == eight.read_bytes()
        assert (
            (tmp_path / "one-aggregate.csv").read_bytes()
            == (tmp_path / "eight-aggregate.csv").read_bytes()
        )
