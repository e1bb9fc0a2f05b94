"""Dense-matrix reference for the search step, for cross-checks only.

Builds the full step operator as an explicit complex matrix from textbook
pieces: shift permutation matrix times I_N (x) C times Q (x) I_{d+1}. The
construction is deliberately independent of the in-place kernels in walk.py
so the two can disagree; it is capped at small dimensions and exists to
catch sign and ordering bugs, not to run experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import GridGeometry, build_shift_permutation
from .walk import MarkedSet, StateVector, coin_state, initial_state

DIMENSION_LIMIT = 4096


@dataclass(frozen=True)
class DenseOperator:
    """Step matrix plus the factors it was assembled from."""

    geometry: GridGeometry
    matrix: np.ndarray
    coin: np.ndarray
    query: np.ndarray
    shift: np.ndarray


def _check_dimension(geometry: GridGeometry) -> int:
    size = geometry.state_size
    if size > DIMENSION_LIMIT:
        raise ValueError(
            f"dense operator would be {size}x{size}; "
            f"limit is {DIMENSION_LIMIT} per side"
        )
    return size


def coin_matrix(geometry: GridGeometry, l: float) -> np.ndarray:
    """Reflection 2|axis><axis| - I on one coin register."""
    axis = coin_state(geometry, l)
    return 2.0 * np.outer(axis, axis) - np.eye(geometry.coin_arity)


def query_matrix(geometry: GridGeometry, marked: MarkedSet) -> np.ndarray:
    """Diagonal +-1 on vertices: -1 on the marked set."""
    signs = np.ones(geometry.vertex_count)
    if marked.m:
        signs[marked.row_indices(geometry)] = -1.0
    return np.diag(signs)


def shift_matrix(geometry: GridGeometry) -> np.ndarray:
    """Permutation matrix of the flip-flop shift on the full space."""
    _check_dimension(geometry)
    perm = build_shift_permutation(geometry)
    size = perm.size
    matrix = np.zeros((size, size))
    matrix[np.arange(size), perm] = 1.0
    return matrix


def build_step_matrix(
    geometry: GridGeometry, marked: MarkedSet, l: float
) -> DenseOperator:
    """Assemble the full step operator S (I (x) C) (Q (x) I)."""
    size = _check_dimension(geometry)
    coin = coin_matrix(geometry, l)
    query = query_matrix(geometry, marked)
    shift = shift_matrix(geometry)
    matrix = shift @ np.kron(np.eye(geometry.vertex_count), coin)
    matrix = matrix @ np.kron(query, np.eye(geometry.coin_arity))
    matrix = matrix.astype(np.complex128)
    assert matrix.shape == (size, size)
    return DenseOperator(geometry, matrix, coin, query, shift)


def is_unitary(matrix: np.ndarray, tol: float = 1e-10) -> bool:
    identity = np.eye(matrix.shape[0])
    return bool(np.max(np.abs(matrix.conj().T @ matrix - identity)) <= tol)


def evolve_dense(
    geometry: GridGeometry, marked: MarkedSet, l: float, steps: int
) -> tuple[np.ndarray, list[float]]:
    """Evolve the initial state by repeated dense matvec.

    Returns the final flat state and the success probability at t = 0..steps.
    """
    operator = build_step_matrix(geometry, marked, l)
    psi = initial_state(geometry, l).flat().copy()
    rows = marked.row_indices(geometry) if marked.m else np.empty(0, dtype=np.int64)
    arity = geometry.coin_arity

    def probability(vec: np.ndarray) -> float:
        if rows.size == 0:
            return 0.0
        block = vec.reshape(geometry.vertex_count, arity)[rows]
        return float(np.sum(np.abs(block) ** 2))

    series = [probability(psi)]
    for _ in range(steps):
        psi = operator.matrix @ psi
        series.append(probability(psi))
    return psi, series


def evolve_engine_flat(
    geometry: GridGeometry, marked: MarkedSet, l: float, steps: int
) -> tuple[np.ndarray, list[float]]:
    """Same contract as evolve_dense but driven by the in-place kernels."""
    from .walk import step, success_probability

    state = initial_state(geometry, l)
    series = [success_probability(state, marked)]
    for _ in range(steps):
        step(state, marked, l)
        series.append(success_probability(state, marked))
    return state.flat().copy(), series
