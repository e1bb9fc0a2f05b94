"""Torus grid families for coined walks: triangular, rectangular, honeycomb.

Vertices are labeled (x, y) with 0 <= x, y < side and linear index
x * side + y. Each grid kind fixes a coin-slot order (movement slots
first, the self-loop last) that is part of the external contract, so
dumps and CSV output are reproducible across runs:

    rectangular: n, s, w, e, loop           (degree 4)
    triangular:  nw, se, w, e, s, n, loop   (degree 6)
    honeycomb:   h, n, s, loop              (degree 3)

All coordinate arithmetic wraps modulo side. The shift is flip-flop:
leaving a vertex through slot c lands on the neighbor with the reverse
slot stored, and repeating the move returns to the start.

The honeycomb torus uses a brick-wall layout: every vertex has n and s
edges, plus exactly one horizontal edge whose side alternates in a
checkerboard pattern (vertices with x + y odd point east, the rest point
west). Horizontal edges therefore always join an even-x column to an
odd-x column, and the wrap is only consistent when side is even.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from enum import Enum

import numpy as np

Vertex = tuple[int, int]


class GridKind(Enum):
    TRIANGULAR = "triangular"
    RECTANGULAR = "rectangular"
    HONEYCOMB = "honeycomb"

    @property
    def degree(self) -> int:
        return _DEGREE[self]


_DEGREE = {
    GridKind.TRIANGULAR: 6,
    GridKind.RECTANGULAR: 4,
    GridKind.HONEYCOMB: 3,
}

# Movement slot -> reverse slot stored at the neighbor (loop excluded).
_REVERSE = {
    GridKind.RECTANGULAR: (1, 0, 3, 2),
    GridKind.TRIANGULAR: (1, 0, 3, 2, 5, 4),
    GridKind.HONEYCOMB: (0, 2, 1),
}

# Movement slot -> (dx, dy). Honeycomb slot 0 depends on vertex parity
# and is resolved in neighbor().
_DELTA = {
    GridKind.RECTANGULAR: ((0, 1), (0, -1), (-1, 0), (1, 0)),
    GridKind.TRIANGULAR: ((-1, 1), (1, -1), (-1, 0), (1, 0), (0, -1), (0, 1)),
    GridKind.HONEYCOMB: (None, (0, 1), (0, -1)),
}

DIRECTION_NAMES = {
    GridKind.RECTANGULAR: ("n", "s", "w", "e", "loop"),
    GridKind.TRIANGULAR: ("nw", "se", "w", "e", "s", "n", "loop"),
    GridKind.HONEYCOMB: ("h", "n", "s", "loop"),
}


@dataclass(frozen=True)
class GridGeometry:
    """A side x side torus of one of the three grid kinds."""

    kind: GridKind
    side: int

    def __post_init__(self) -> None:
        if self.side < 2:
            raise ValueError(f"side must be >= 2, got {self.side}")
        if self.kind is GridKind.HONEYCOMB and self.side % 2 != 0:
            raise ValueError(
                f"honeycomb torus requires an even side, got {self.side}"
            )

    @property
    def vertex_count(self) -> int:
        return self.side * self.side

    @property
    def degree(self) -> int:
        return self.kind.degree

    @property
    def coin_arity(self) -> int:
        return self.kind.degree + 1

    @property
    def loop_slot(self) -> int:
        return self.kind.degree

    @property
    def state_size(self) -> int:
        return self.vertex_count * self.coin_arity

    def vertex_index(self, v: Vertex) -> int:
        x, y = v
        if not (0 <= x < self.side and 0 <= y < self.side):
            raise ValueError(f"vertex {v} out of range for side {self.side}")
        return x * self.side + y

    def vertex_at(self, index: int) -> Vertex:
        if not (0 <= index < self.vertex_count):
            raise ValueError(f"vertex index {index} out of range")
        return divmod(index, self.side)


def neighbor(geometry: GridGeometry, v: Vertex, c: int) -> tuple[Vertex, int]:
    """Adjacent vertex reached by leaving v through movement slot c.

    Returns the neighbor together with the slot the walker occupies there
    under flip-flop semantics. The self-loop slot is not a movement and is
    rejected.
    """
    kind = geometry.kind
    x, y = v
    if not (0 <= x < geometry.side and 0 <= y < geometry.side):
        raise ValueError(f"vertex {v} out of range for side {geometry.side}")
    if not (0 <= c < geometry.degree):
        raise ValueError(
            f"slot {c} is not a movement direction for {kind.value} "
            f"(movement slots are 0..{geometry.degree - 1})"
        )
    if kind is GridKind.HONEYCOMB and c == 0:
        dx, dy = (1, 0) if (x + y) % 2 == 1 else (-1, 0)
    else:
        dx, dy = _DELTA[kind][c]
    side = geometry.side
    return ((x + dx) % side, (y + dy) % side), _REVERSE[kind][c]


@functools.lru_cache(maxsize=None)
def build_shift_permutation(geometry: GridGeometry) -> np.ndarray:
    """Index permutation encoding the flip-flop shift.

    Entry idx(v, c) holds idx(neighbor, reverse slot) for movement slots
    and maps loop entries to themselves; the result is an involution.
    Cached per geometry and returned read-only.
    """
    side = geometry.side
    arity = geometry.coin_arity
    degree = geometry.degree
    perm = np.empty(geometry.state_size, dtype=np.intp)
    for x in range(side):
        for y in range(side):
            base = (x * side + y) * arity
            for c in range(degree):
                (nx, ny), rc = neighbor(geometry, (x, y), c)
                perm[base + c] = (nx * side + ny) * arity + rc
            perm[base + degree] = base + degree
    perm.flags.writeable = False
    return perm
