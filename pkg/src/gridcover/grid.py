"""Unit-cell grid model: coverage geometry and coverage accounting.

The network area is an M x N lattice of unit cells addressed by 1-based
(i, j) coordinates (i = row, j = column).  A node at cell (i, j) with
sensing radius r_s covers the clipped (2*r_s+1) x (2*r_s+1) square around
it; a mobile node may travel up to rho_x rows and rho_y columns per
iteration.  Coverage ratios are kept as exact integer pairs so threshold
comparisons never depend on floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Set, Tuple


class Cell(NamedTuple):
    """A 1-based (row, column) grid coordinate."""

    i: int
    j: int


@dataclass(frozen=True)
class GridSpec:
    """An M x N lattice of unit cells, rows 1..M and columns 1..N."""

    rows: int
    cols: int

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"grid dimensions must be >= 1, got {self.rows}x{self.cols}")

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def __contains__(self, cell: Tuple[int, int]) -> bool:
        i, j = cell
        return 1 <= i <= self.rows and 1 <= j <= self.cols

    def cells(self) -> Iterator[Cell]:
        """All cells in row-major order."""
        for i in range(1, self.rows + 1):
            for j in range(1, self.cols + 1):
                yield Cell(i, j)

    def require(self, cell: Tuple[int, int], what: str = "cell") -> Cell:
        if cell not in self:
            raise ValueError(f"{what} {tuple(cell)} outside {self.rows}x{self.cols} grid")
        return Cell(*cell)


@dataclass(frozen=True)
class SensorParams:
    """Sensing radius, one-step traveling range and overlap cap.

    r_s counts cells sensed in each direction (footprint is a clipped
    (2*r_s+1)^2 square); rho_x / rho_y bound the per-iteration row/column
    displacement; c_o caps how many times a cell may be counted covered.
    """

    r_s: int = 1
    rho_x: int = 2
    rho_y: int = 2
    c_o: int = 3

    def __post_init__(self) -> None:
        if self.r_s < 0:
            raise ValueError("sensing radius must be >= 0")
        if self.rho_x < 0 or self.rho_y < 0:
            raise ValueError("traveling ranges must be >= 0")
        if self.c_o < 1:
            raise ValueError("overlap factor must be >= 1")


@dataclass(frozen=True)
class CoverageReport:
    """Outcome of evaluating a deployment plus mobile plan.

    covered_count / total_cells is the exact coverage ratio; multiplicity
    counts, per cell, how many (node, iteration) mobile footprints contain
    it (static coverage is not part of the multiplicity); movements is the
    number of (node, iteration) placements present in the plan.
    """

    covered: frozenset
    total_cells: int
    multiplicity: Dict[Cell, int] = field(repr=False)
    movements: int = 0

    @property
    def covered_count(self) -> int:
        return len(self.covered)

    @property
    def coverage_ratio(self) -> Fraction:
        return Fraction(len(self.covered), self.total_cells)

    @property
    def coverage_pct(self) -> float:
        return 100.0 * len(self.covered) / self.total_cells


def sensing_footprint(center: Tuple[int, int], r_s: int, grid: GridSpec) -> Set[Cell]:
    """Cells sensed by a node at `center`: the Chebyshev ball of radius r_s
    clipped to the grid."""
    ci, cj = grid.require(center, "footprint center")
    return {
        Cell(i, j)
        for i in range(max(1, ci - r_s), min(grid.rows, ci + r_s) + 1)
        for j in range(max(1, cj - r_s), min(grid.cols, cj + r_s) + 1)
    }


def reachable_window(center: Tuple[int, int], rho_x: int, rho_y: int, grid: GridSpec) -> Set[Cell]:
    """Cells a mobile node at `center` may occupy next iteration (staying
    put included), clipped to the grid."""
    ci, cj = grid.require(center, "window center")
    return {
        Cell(i, j)
        for i in range(max(1, ci - rho_x), min(grid.rows, ci + rho_x) + 1)
        for j in range(max(1, cj - rho_y), min(grid.cols, cj + rho_y) + 1)
    }


def boundary_cells(grid: GridSpec) -> Set[Cell]:
    """Perimeter cells. For M, N >= 2 there are exactly 2(M+N-2); 1-row or
    1-column grids degenerate to every cell being boundary."""
    return {
        cell
        for cell in grid.cells()
        if cell.i in (1, grid.rows) or cell.j in (1, grid.cols)
    }


def interior_cells(grid: GridSpec) -> Set[Cell]:
    """Cells that are not on the perimeter."""
    return set(grid.cells()) - boundary_cells(grid)


def static_coverage(
    placements: List[Tuple[int, int]], r_s: int, grid: GridSpec
) -> Tuple[Set[Cell], Set[Cell]]:
    """Partition the grid into (covered, uncovered) for a static deployment.

    Returns (C_2, C_1): C_2 is the union of sensing footprints, C_1 the
    complement; they partition the cell set.
    """
    c2: Set[Cell] = set()
    for pos in placements:
        c2 |= sensing_footprint(pos, r_s, grid)
    c1 = set(grid.cells()) - c2
    return c2, c1


def evaluate_plan(static, plan, params: SensorParams, grid: GridSpec) -> CoverageReport:
    """Coverage accounting for a static deployment plus a mobile plan.

    `static` is anything with a `C_2` cell set (or None for no static
    nodes); `plan` is anything with a `positions` mapping of
    (node, iteration) -> cell (or None for no mobiles).  A cell counts as
    covered if a static footprint or any mobile placement's footprint
    contains it.  Out-of-grid plan positions raise, listing the offending
    (node, iteration) pairs.
    """
    covered: Set[Cell] = set()
    if static is not None:
        covered |= set(static.C_2)

    positions = dict(plan.positions) if plan is not None else {}
    bad = sorted(lk for lk, pos in positions.items() if pos not in grid)
    if bad:
        raise ValueError(f"plan positions outside grid at (node, iteration): {bad}")

    multiplicity: Dict[Cell, int] = {}
    for lk in sorted(positions):
        for cell in sensing_footprint(positions[lk], params.r_s, grid):
            multiplicity[cell] = multiplicity.get(cell, 0) + 1
            covered.add(cell)

    return CoverageReport(
        covered=frozenset(covered),
        total_cells=grid.n_cells,
        multiplicity=multiplicity,
        movements=len(positions),
    )
