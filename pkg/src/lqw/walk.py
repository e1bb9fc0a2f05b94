"""Walker state and the search step for self-loop weighted coined walks.

The walker lives on position (x) coin space: side^2 vertices with
degree + 1 coin slots each (slot order as in grids, the self-loop last).
Amplitudes sit in an (N, degree+1) complex128 array, vertex-major, so the
flattened view is indexed by idx(v, c) = vertex_index(v) * (degree+1) + c.

One search step applies, in order: the query (sign flip over all slots of
marked vertices), the per-vertex coin reflection about the weighted axis,
and the flip-flop shift. Nothing renormalizes; norm drift is left
observable on purpose.
"""

from __future__ import annotations

import functools
import math
from typing import IO, Iterable

import numpy as np

from .grids import GridGeometry, Vertex, build_shift_permutation


@functools.lru_cache(maxsize=512)
def _coin_axis(degree: int, weight: float) -> np.ndarray:
    axis = np.empty(degree + 1)
    axis[:degree] = 1.0 / math.sqrt(degree + weight)
    axis[degree] = math.sqrt(weight / (degree + weight))
    axis.flags.writeable = False
    return axis


def coin_state(geometry: GridGeometry, l: float) -> np.ndarray:
    """Coin axis for self-loop weight l.

    Movement slots carry 1/sqrt(d + l) and the loop slot sqrt(l / (d + l)),
    a unit vector for any l >= 0. l = 0 zeroes the loop slot and recovers
    the plain Grover coin.
    """
    if l < 0:
        raise ValueError(f"self-loop weight must be non-negative, got {l}")
    return _coin_axis(geometry.degree, float(l))


class MarkedSet:
    """Distinct vertices the search targets.

    Input coordinates are deduplicated and kept sorted; linear row indices
    are computed lazily per grid side and cached, since the oracle and the
    probability readout hit them every step.
    """

    def __init__(self, vertices: Iterable[Vertex] = ()):
        points = sorted({(int(x), int(y)) for x, y in vertices})
        self.vertices: tuple[Vertex, ...] = tuple(points)
        self._coords = np.array(points, dtype=np.int64).reshape(-1, 2)
        self._rows: dict[int, np.ndarray] = {}

    @property
    def m(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __eq__(self, other) -> bool:
        return isinstance(other, MarkedSet) and self.vertices == other.vertices

    def __hash__(self) -> int:
        return hash(self.vertices)

    def __repr__(self) -> str:
        return f"MarkedSet({list(self.vertices)!r})"

    def row_indices(self, geometry: GridGeometry) -> np.ndarray:
        """Linear vertex indices of the marked set, validated for geometry."""
        side = geometry.side
        rows = self._rows.get(side)
        if rows is None:
            if self.m and (self._coords.min() < 0 or self._coords.max() >= side):
                bad = next(
                    v
                    for v in self.vertices
                    if not (0 <= v[0] < side and 0 <= v[1] < side)
                )
                raise ValueError(f"marked vertex {bad} out of range for side {side}")
            rows = self._coords[:, 0] * side + self._coords[:, 1]
            rows.flags.writeable = False
            self._rows[side] = rows
        return rows


class StateVector:
    """N x (degree+1) complex amplitudes tied to a grid geometry."""

    def __init__(self, geometry: GridGeometry, amplitudes: np.ndarray):
        expected = (geometry.vertex_count, geometry.coin_arity)
        if amplitudes.shape != expected:
            raise ValueError(
                f"amplitude array has shape {amplitudes.shape}, expected {expected}"
            )
        self.geometry = geometry
        self.amplitudes = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        self._scratch = np.empty_like(self.amplitudes)

    def copy(self) -> "StateVector":
        return StateVector(self.geometry, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def flat(self) -> np.ndarray:
        """Flattened view in idx(v, c) order."""
        return self.amplitudes.reshape(-1)


def initial_state(geometry: GridGeometry, l: float) -> StateVector:
    """Uniform superposition over vertices, coin axis in every coin register."""
    axis = coin_state(geometry, l)
    amps = np.empty((geometry.vertex_count, geometry.coin_arity), dtype=np.complex128)
    amps[:] = axis / math.sqrt(geometry.vertex_count)
    return StateVector(geometry, amps)


def apply_oracle(state: StateVector, marked: MarkedSet) -> StateVector:
    """Flip the sign of every amplitude at marked vertices, in place."""
    if marked.m:
        rows = marked.row_indices(state.geometry)
        state.amplitudes[rows] *= -1.0
    return state


def apply_coin(state: StateVector, l: float) -> StateVector:
    """Reflect each vertex's coin register about the weighted axis, in place.

    Per vertex: a <- 2 (axis . a) axis - a. The axis is real, so the kernel
    mixes real coefficients into complex amplitudes.
    """
    axis = coin_state(state.geometry, l)
    a = state.amplitudes
    proj = a @ axis
    scratch = state._scratch
    np.multiply(proj[:, None], axis[None, :], out=scratch)
    scratch *= 2.0
    np.subtract(scratch, a, out=a)
    return state


def apply_shift(state: StateVector) -> StateVector:
    """Apply the flip-flop shift permutation, in place.

    Gathers into a scratch buffer and swaps it in; loop amplitudes stay put.
    """
    perm = build_shift_permutation(state.geometry)
    flat = state.amplitudes.reshape(-1)
    out = state._scratch.reshape(-1)
    np.take(flat, perm, out=out)
    state.amplitudes, state._scratch = state._scratch, state.amplitudes
    return state


def step(state: StateVector, marked: MarkedSet, l: float) -> StateVector:
    """One search step: query, coin, shift (in place)."""
    apply_oracle(state, marked)
    apply_coin(state, l)
    apply_shift(state)
    return state


def success_probability(state: StateVector, marked: MarkedSet) -> float:
    """Total probability mass on the marked vertices."""
    if marked.m == 0:
        return 0.0
    rows = marked.row_indices(state.geometry)
    block = state.amplitudes[rows]
    return float(np.sum(block.real**2 + block.imag**2))


def overlap_with_initial(state: StateVector, l: float) -> complex:
    """Inner product of the initial state with the current state.

    The initial state factorizes as (coin axis)/sqrt(N) per vertex and is
    real, so the overlap reduces to one pass over column sums.
    """
    axis = coin_state(state.geometry, l)
    column_sums = state.amplitudes.sum(axis=0)
    return complex((column_sums @ axis) / math.sqrt(state.geometry.vertex_count))


def dump_state(state: StateVector, stream: IO[str]) -> None:
    """Write the amplitudes as CSV rows index,x,y,c,re,im in idx order."""
    side = state.geometry.side
    arity = state.geometry.coin_arity
    flat = state.amplitudes.reshape(-1)
    stream.write("index,x,y,c,re,im\n")
    for index, value in enumerate(flat):
        vertex, c = divmod(index, arity)
        x, y = divmod(vertex, side)
        stream.write(
            f"{index},{x},{y},{c},{value.real:.17g},{value.imag:.17g}\n"
        )
