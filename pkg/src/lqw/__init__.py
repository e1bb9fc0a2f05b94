"""Self-loop weighted coined quantum walk search on 2D torus grids."""

__version__ = "0.1.0"

from .experiments import (
    AggregateRow,
    AggregateStats,
    EvolutionRecord,
    OptimalWeight,
    PeakResult,
    RunRecord,
    ScanPoint,
    WeightSchedule,
    evolve_series,
    find_first_peak,
    find_optimal_weight,
    fit_loglog_slope,
    peak_of_series,
    random_marked_set,
    run_ensemble,
    scaling_reference,
    scan_weight,
)
from .grids import (
    DIRECTION_NAMES,
    GridGeometry,
    GridKind,
    Vertex,
    build_shift_permutation,
    neighbor,
)
from .walk import (
    MarkedSet,
    StateVector,
    apply_coin,
    apply_oracle,
    apply_shift,
    coin_state,
    initial_state,
    overlap_with_initial,
    step,
    success_probability,
)

__all__ = [
    "AggregateRow",
    "AggregateStats",
    "DIRECTION_NAMES",
    "EvolutionRecord",
    "GridGeometry",
    "GridKind",
    "MarkedSet",
    "OptimalWeight",
    "PeakResult",
    "RunRecord",
    "ScanPoint",
    "StateVector",
    "Vertex",
    "WeightSchedule",
    "apply_coin",
    "apply_oracle",
    "apply_shift",
    "build_shift_permutation",
    "coin_state",
    "evolve_series",
    "find_first_peak",
    "find_optimal_weight",
    "fit_loglog_slope",
    "initial_state",
    "neighbor",
    "overlap_with_initial",
    "peak_of_series",
    "random_marked_set",
    "run_ensemble",
    "scaling_reference",
    "scan_weight",
    "step",
    "success_probability",
]
