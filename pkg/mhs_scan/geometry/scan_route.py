# component_id: scan_route
# kind: runtime_module
# area: geometry
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Build, invert, validate and serialize 2D-to-1D scan routes over patch grids.

"""
Scan routes over an H×W patch grid.

A route is a bijective visit order: ``perm[t]`` is the row-major index of the
cell visited at step ``t`` and ``inv[cell]`` is the step at which ``cell`` is
visited.

Variant 0 of every pattern starts at the top-left cell:

- RASTER:   rows top to bottom, each row left to right.
- SNAKE:    row-major serpentine, odd rows reversed.
- DIAGONAL: anti-diagonals ``r + c = d`` for ``d = 0 .. H+W-2``; even
            diagonals run with increasing row, odd ones with decreasing row.
- SPIRAL:   clockwise inward peel starting along the top edge.

Variants 1-3 reflect the variant-0 order horizontally, vertically, or both,
so they start at the top-right, bottom-left and bottom-right corner.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from functools import lru_cache
from typing import Iterable, List, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from ..errors import ContractError, DimensionError

LOGGER_NAME = "mhs_scan.geometry"
logger = logging.getLogger(LOGGER_NAME)

IndexArray = npt.NDArray[np.int64]
Cell = Tuple[int, int]


class ScanPattern(str, Enum):
    RASTER = "raster"
    SNAKE = "snake"
    DIAGONAL = "diagonal"
    SPIRAL = "spiral"


class RouteVariant(IntEnum):
    """Starting corner of a route; orientation follows from the reflection."""

    TOP_LEFT = 0
    TOP_RIGHT = 1
    BOTTOM_LEFT = 2
    BOTTOM_RIGHT = 3

    @property
    def flips(self) -> Tuple[bool, bool]:
        """``(flip_rows, flip_cols)`` applied to the variant-0 construction."""
        return bool(self & 2), bool(self & 1)


ROUTES_PER_PATTERN = len(RouteVariant)


class AdjacencyMetric(str, Enum):
    MANHATTAN = "manhattan"
    CHEBYSHEV = "chebyshev"


# Raster has no adjacency guarantee; it is reported under Manhattan so row wraps show up.
PATTERN_METRIC = {
    ScanPattern.RASTER: AdjacencyMetric.MANHATTAN,
    ScanPattern.SNAKE: AdjacencyMetric.MANHATTAN,
    ScanPattern.SPIRAL: AdjacencyMetric.MANHATTAN,
    ScanPattern.DIAGONAL: AdjacencyMetric.CHEBYSHEV,
}


@dataclass(frozen=True)
class GridShape:
    """Patch grid extents (rows ``H``, columns ``W``)."""

    H: int
    W: int

    def __post_init__(self) -> None:
        if int(self.H) < 1 or int(self.W) < 1:
            raise DimensionError(f"grid extents must be >= 1, got H={self.H}, W={self.W}")

    @property
    def L(self) -> int:
        return self.H * self.W

    def cell(self, flat_index: int) -> Cell:
        return divmod(int(flat_index), self.W)


@dataclass(frozen=True, eq=False)
class ScanRoute:
    """Immutable visit order plus its inverse.

    ``perm`` and ``inv`` are read-only int64 arrays of length ``grid.L``.
    """

    pattern: ScanPattern
    variant: RouteVariant
    grid: GridShape
    perm: IndexArray = field(repr=False)
    inv: IndexArray = field(repr=False)

    @classmethod
    def from_perm(
        cls,
        pattern: ScanPattern,
        variant: int,
        grid: GridShape,
        perm: Sequence[int],
    ) -> "ScanRoute":
        """Wrap an explicit visit order, checking that it is a bijection."""
        arr = np.asarray(perm, dtype=np.int64).reshape(-1)
        if arr.shape[0] != grid.L:
            raise DimensionError(f"perm length {arr.shape[0]} differs from grid size {grid.L}")
        if not np.array_equal(np.sort(arr), np.arange(grid.L, dtype=np.int64)):
            raise ContractError("perm is not a permutation of the grid cells")
        arr = arr.copy()
        arr.setflags(write=False)
        route = cls(ScanPattern(pattern), RouteVariant(variant), grid, arr, arr)
        inv = invert(route)
        inv.setflags(write=False)
        object.__setattr__(route, "inv", inv)
        return route

    @property
    def L(self) -> int:
        return self.grid.L

    def cells(self) -> List[Cell]:
        """Visited ``(row, col)`` pairs in step order."""
        return [self.grid.cell(i) for i in self.perm]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScanRoute):
            return NotImplemented
        return (
            self.pattern is other.pattern
            and self.variant == other.variant
            and self.grid == other.grid
            and np.array_equal(self.perm, other.perm)
        )

    def __hash__(self) -> int:
        return hash((self.pattern, int(self.variant), self.grid, self.perm.tobytes()))


# ---------------------------------------------------------------------------
# Variant-0 constructions (lists of (row, col))
# ---------------------------------------------------------------------------

def _raster_cells(H: int, W: int) -> List[Cell]:
    return [(r, c) for r in range(H) for c in range(W)]


def _snake_cells(H: int, W: int) -> List[Cell]:
    cells: List[Cell] = []
    for r in range(H):
        cols: Iterable[int] = range(W) if r % 2 == 0 else range(W - 1, -1, -1)
        cells.extend((r, c) for c in cols)
    return cells


def _diagonal_cells(H: int, W: int) -> List[Cell]:
    cells: List[Cell] = []
    for d in range(H + W - 1):
        lo, hi = max(0, d - W + 1), min(d, H - 1)
        rows: Iterable[int] = range(lo, hi + 1) if d % 2 == 0 else range(hi, lo - 1, -1)
        cells.extend((r, d - r) for r in rows)
    return cells


def _spiral_cells(H: int, W: int) -> List[Cell]:
    cells: List[Cell] = []
    top, bottom, left, right = 0, H - 1, 0, W - 1
    while top <= bottom and left <= right:
        cells.extend((top, c) for c in range(left, right + 1))
        cells.extend((r, right) for r in range(top + 1, bottom + 1))
        if top < bottom:
            cells.extend((bottom, c) for c in range(right - 1, left - 1, -1))
        if left < right:
            cells.extend((r, left) for r in range(bottom - 1, top, -1))
        top, bottom, left, right = top + 1, bottom - 1, left + 1, right - 1
    return cells


_CONSTRUCTIONS = {
    ScanPattern.RASTER: _raster_cells,
    ScanPattern.SNAKE: _snake_cells,
    ScanPattern.DIAGONAL: _diagonal_cells,
    ScanPattern.SPIRAL: _spiral_cells,
}


def reflect_cell(cell: Cell, grid: GridShape, variant: RouteVariant) -> Cell:
    """Map a cell through the reflection that turns variant 0 into ``variant``."""
    flip_rows, flip_cols = variant.flips
    r, c = cell
    return (grid.H - 1 - r if flip_rows else r, grid.W - 1 - c if flip_cols else c)


# ---------------------------------------------------------------------------
# Public API
# ---------------------------------------------------------------------------

@lru_cache(maxsize=512)
def _cached_route(pattern: ScanPattern, variant: RouteVariant, H: int, W: int) -> ScanRoute:
    grid = GridShape(H, W)
    cells = _CONSTRUCTIONS[pattern](H, W)
    perm = [r * W + c for r, c in (reflect_cell(cell, grid, variant) for cell in cells)]
    logger.debug("built route pattern=%s variant=%d grid=%dx%d", pattern.value, int(variant), H, W)
    return ScanRoute.from_perm(pattern, variant, grid, perm)


def build_route(pattern: "ScanPattern | str", variant: int, grid: GridShape) -> ScanRoute:
    """Build the route for ``(pattern, variant)`` on ``grid``."""
    return _cached_route(ScanPattern(pattern), RouteVariant(variant), int(grid.H), int(grid.W))


def route_set(pattern: "ScanPattern | str", grid: GridShape, k: int = ROUTES_PER_PATTERN) -> Tuple[ScanRoute, ...]:
    """The first ``k`` corner variants of ``pattern`` on ``grid``."""
    if not 1 <= k <= ROUTES_PER_PATTERN:
        raise ValueError(f"k must be in 1..{ROUTES_PER_PATTERN}, got {k}")
    return tuple(build_route(pattern, v, grid) for v in range(k))


def invert(route: ScanRoute) -> IndexArray:
    """Return ``inv`` with ``inv[perm[t]] == t``."""
    inv = np.empty(route.perm.shape[0], dtype=np.int64)
    inv[route.perm] = np.arange(route.perm.shape[0], dtype=np.int64)
    return inv


def routes_share_layout(routes: Sequence[ScanRoute]) -> bool:
    """True when every route visits each cell at the same step."""
    return all(np.array_equal(routes[0].inv, r.inv) for r in routes[1:])


# ---------------------------------------------------------------------------
# Adjacency
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdjacencyViolation:
    step: int
    from_cell: Cell
    to_cell: Cell
    distance: int


@dataclass(frozen=True)
class AdjacencyReport:
    pattern: ScanPattern
    variant: RouteVariant
    metric: AdjacencyMetric
    violations: Tuple[AdjacencyViolation, ...]

    @property
    def is_adjacent(self) -> bool:
        return not self.violations

    @property
    def max_distance(self) -> int:
        return max((v.distance for v in self.violations), default=1)


def _distance(a: Cell, b: Cell, metric: AdjacencyMetric) -> int:
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    return dr + dc if metric is AdjacencyMetric.MANHATTAN else max(dr, dc)


def adjacency_report(route: ScanRoute) -> AdjacencyReport:
    """List consecutive steps whose cells are farther apart than distance 1."""
    metric = PATTERN_METRIC[route.pattern]
    cells = route.cells()
    violations = []
    for step in range(1, len(cells)):
        dist = _distance(cells[step - 1], cells[step], metric)
        if dist != 1:
            violations.append(AdjacencyViolation(step, cells[step - 1], cells[step], dist))
    return AdjacencyReport(route.pattern, route.variant, metric, tuple(violations))


# ---------------------------------------------------------------------------
# Dump format: "pattern variant H W" newline, then the perm
# ---------------------------------------------------------------------------

def dump_route(route: ScanRoute) -> str:
    header = f"{route.pattern.value} {int(route.variant)} {route.grid.H} {route.grid.W}"
    return header + "\n" + " ".join(str(int(i)) for i in route.perm) + "\n"


def parse_route_dump(text: str) -> ScanRoute:
    lines = [line.strip() for line in text.strip().splitlines()]
    if len(lines) != 2:
        raise ValueError(f"route dump must have 2 lines, got {len(lines)}")
    head = lines[0].split()
    if len(head) != 4:
        raise ValueError(f"route dump header must be 'pattern variant H W', got {lines[0]!r}")
    pattern, variant, H, W = head[0], int(head[1]), int(head[2]), int(head[3])
    perm = [int(tok) for tok in lines[1].split()]
    return ScanRoute.from_perm(ScanPattern(pattern), variant, GridShape(H, W), perm)


__all__ = [
    "ScanPattern",
    "RouteVariant",
    "ROUTES_PER_PATTERN",
    "AdjacencyMetric",
    "PATTERN_METRIC",
    "GridShape",
    "ScanRoute",
    "reflect_cell",
    "build_route",
    "route_set",
    "invert",
    "routes_share_layout",
    "AdjacencyViolation",
    "AdjacencyReport",
    "adjacency_report",
    "dump_route",
    "parse_route_dump",
]
