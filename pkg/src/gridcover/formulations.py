"""The three coverage MILPs: static placement, coverage maximization and
movement minimization, plus decoding of solver assignments back into
deployments and plans.

Builders are pure and deterministic: variables and constraints are emitted
in a fixed order (equation blocks in their presentation order; within a
block, cells row-major, then nodes ascending, then iterations ascending),
so exported LP text is byte-stable.

Conventions baked in here:
  - The static coverage-linking equalities are emitted for every grid cell
    (the uncovered set is only known after solving, so restricting them
    would be circular); this matches the published variable/constraint
    counts.
  - The mobility constraint is an inequality (next position within the
    reachable window of the current one); an equality would force a node
    to occupy every window cell at once, contradicting the one-cell
    position constraint.
  - Mobile-node variables exist only over the uncovered set: windows are
    intersected with it and out-of-grid cells are silently clipped.
  - The movement-minimization coverage threshold folds the static
    contribution in as a constant and rounds the required covered-cell
    count up to the nearest integer (the left side is integral at any
    integral solution).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import repeat
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple, Union

from .grid import Cell, GridSpec, boundary_cells, sensing_footprint, static_coverage
from .milp import Assignment, LinearConstraint, MilpInstance

INT_TOL = 1e-6


class DecodeError(ValueError):
    """Assignment cannot be decoded into a deployment/plan."""


class PlanConsistencyError(RuntimeError):
    """A decoded plan violated its own invariants (builder bug)."""


@dataclass(frozen=True)
class StaticDeployment:
    """Solved static placement and the induced covered/uncovered partition."""

    positions: Tuple[Cell, ...]
    covered: FrozenSet[Cell]  # cells sensed by some static node (C_2)
    uncovered: FrozenSet[Cell]  # complement within the grid (C_1)
    boundary_weight: float
    objective_value: float

    @property
    def C_2(self) -> FrozenSet[Cell]:
        return self.covered

    @property
    def C_1(self) -> FrozenSet[Cell]:
        return self.uncovered


@dataclass(frozen=True)
class MobilePlan:
    """Per-node cell positions over iterations 1..horizon.

    positions maps (node, iteration) to a Cell; a missing key means the
    node is stopped (movement-minimization plans may stop early; coverage
    plans are total).
    """

    n_mobile: int
    horizon: int
    positions: Dict[Tuple[int, int], Cell] = field(default_factory=dict)

    @property
    def movements(self) -> int:
        return len(self.positions)

    def node_path(self, node: int) -> List[Optional[Cell]]:
        return [self.positions.get((node, k)) for k in range(1, self.horizon + 1)]


@dataclass(frozen=True)
class PlanViolation:
    kind: str  # "grid" | "membership" | "mobility" | "stop"
    node: int
    iteration: int
    message: str


class FormulationHandle:
    """A built instance plus the variable bookkeeping needed to decode it.

    Variable ids follow a fixed arithmetic layout (binaries first, coverage
    variables after), so the id maps are materialized lazily on first use.
    """

    def __init__(
        self,
        kind: str,  # "static" | "cov" | "mov"
        instance: MilpInstance,
        grid: GridSpec,
        n_static: int = 0,
        n_mobile: int = 0,
        horizon: int = 0,
        r_s: int = 1,
        rho_x: int = 2,
        rho_y: int = 2,
        c_o: int = 1,
        boundary_weight: float = 1.0,
        uncovered: Tuple[Cell, ...] = (),
        static_covered_count: int = 0,
        coverage_threshold: Optional[int] = None,
        nothing_to_plan: bool = False,
    ):
        self.kind = kind
        self.instance = instance
        self.grid = grid
        self.n_static = n_static
        self.n_mobile = n_mobile
        self.horizon = horizon
        self.r_s = r_s
        self.rho_x = rho_x
        self.rho_y = rho_y
        self.c_o = c_o
        self.boundary_weight = boundary_weight
        self.uncovered = uncovered
        self.static_covered_count = static_covered_count
        self.coverage_threshold = coverage_threshold
        self.nothing_to_plan = nothing_to_plan
        self._x_static: Optional[Dict[Tuple[int, Cell], int]] = None
        self._c_static: Optional[Dict[Tuple[int, Cell], int]] = None
        self._x_mobile: Optional[Dict[Tuple[int, int, Cell], int]] = None
        self._c_mobile: Optional[Dict[Tuple[int, int, Cell], int]] = None
        self._c_cell: Optional[Dict[Cell, int]] = None

    @property
    def x_static(self) -> Dict[Tuple[int, Cell], int]:
        if self._x_static is None:
            cells = list(self.grid.cells())
            n = len(cells)
            self._x_static = {
                (s, cell): (s - 1) * n + pos
                for s in range(1, self.n_static + 1)
                for pos, cell in enumerate(cells)
            }
        return self._x_static

    @property
    def c_static(self) -> Dict[Tuple[int, Cell], int]:
        if self._c_static is None:
            base = self.n_static * self.grid.n_cells
            self._c_static = {key: base + vid for key, vid in self.x_static.items()}
        return self._c_static

    @property
    def x_mobile(self) -> Dict[Tuple[int, int, Cell], int]:
        if self._x_mobile is None:
            n1 = len(self.uncovered)
            self._x_mobile = {
                (l, k, cell): ((l - 1) * self.horizon + (k - 1)) * n1 + pos
                for l in range(1, self.n_mobile + 1)
                for k in range(1, self.horizon + 1)
                for pos, cell in enumerate(self.uncovered)
            }
        return self._x_mobile

    @property
    def c_mobile(self) -> Dict[Tuple[int, int, Cell], int]:
        if self._c_mobile is None:
            base = self.n_mobile * self.horizon * len(self.uncovered)
            self._c_mobile = {key: base + vid for key, vid in self.x_mobile.items()}
        return self._c_mobile

    @property
    def c_cell(self) -> Dict[Cell, int]:
        if self._c_cell is None:
            base = 2 * self.n_mobile * self.horizon * len(self.uncovered)
            self._c_cell = {cell: base + pos for pos, cell in enumerate(self.uncovered)}
        return self._c_cell

    def coverage_variable_ids(self) -> range:
        """Ids of every continuous coverage variable (for integrality audits)."""
        if self.kind == "static":
            n = self.n_static * self.grid.n_cells
            return range(n, 2 * n)
        n_x = self.n_mobile * self.horizon * len(self.uncovered)
        return range(n_x, self.instance.n_variables)


def _exact_fraction(value: Union[int, float, str, Fraction]) -> Fraction:
    """Exact rational from user input; floats go via their shortest decimal
    repr so 0.9 means 9/10, not the binary float below it."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def _clipped_box(cell: Cell, dr: int, dc: int, grid: GridSpec) -> List[Tuple[int, int]]:
    # plain tuples: they hash/compare equal to Cell, and build faster
    i, j = cell
    return [
        (p, q)
        for p in range(max(1, i - dr), min(grid.rows, i + dr) + 1)
        for q in range(max(1, j - dc), min(grid.cols, j + dc) + 1)
    ]


def build_milp_static(
    grid: GridSpec,
    n_static: int,
    r_s: int = 1,
    c_o: int = 1,
    boundary_weight: float = 4.0,
) -> FormulationHandle:
    """Static placement MILP: maximize covered cells with boundary cells
    weighted by `boundary_weight`, one cell per node, per-cell coverage
    capped at c_o.  Constraint count is n_static + (n_static + 1) * |C|."""
    if n_static < 1:
        raise ValueError("n_static must be >= 1")
    if boundary_weight < 1:
        raise ValueError("boundary_weight must be >= 1")
    if c_o < 1:
        raise ValueError("c_o must be >= 1")

    inst = MilpInstance("milp-static")
    cells = list(grid.cells())
    n_cells = len(cells)
    cell_pos = {cell: idx for idx, cell in enumerate(cells)}
    boundary = boundary_cells(grid)

    handle = FormulationHandle(
        kind="static",
        instance=inst,
        grid=grid,
        n_static=n_static,
        r_s=r_s,
        c_o=c_o,
        boundary_weight=boundary_weight,
    )

    # variable ids are arithmetic: x block then c block, node-major, cells row-major
    cell_tag = ["%d_%d" % cell for cell in cells]
    inst._bulk_variables(
        [p + tag for p in ("x_s%d_" % s for s in range(1, n_static + 1)) for tag in cell_tag],
        "binary", 0.0, 1.0,
    )
    c_base = n_static * n_cells
    inst._bulk_variables(
        [p + tag for p in ("c_s%d_" % s for s in range(1, n_static + 1)) for tag in cell_tag],
        "continuous", 0.0, 1.0,
    )

    weights = [boundary_weight if cell in boundary else 1.0 for cell in cells]
    inst.set_objective(
        [
            (c_base + (s - 1) * n_cells + pos, weights[pos])
            for s in range(1, n_static + 1)
            for pos in range(n_cells)
        ],
        "maximize",
    )

    emit = inst._fast_constraint
    # one cell per static node
    for s in range(1, n_static + 1):
        base = (s - 1) * n_cells
        emit(tuple((base + pos, 1.0) for pos in range(n_cells)), "=", 1.0)
    # coverage linking: c equals the footprint-window sum of x
    windows = [
        [cell_pos[w] for w in _clipped_box(cell, r_s, r_s, grid)] for cell in cells
    ]
    for pos in range(n_cells):
        win_terms = [(w, -1.0) for w in windows[pos]]
        for s in range(1, n_static + 1):
            base = (s - 1) * n_cells
            emit(
                ((c_base + base + pos, 1.0),) + tuple((base + w, c) for w, c in win_terms),
                "=",
                0.0,
            )
    # per-cell overlap cap
    for pos in range(n_cells):
        emit(
            tuple((c_base + (s - 1) * n_cells + pos, 1.0) for s in range(1, n_static + 1)),
            "<=",
            float(c_o),
        )
    return handle


def decode_static(handle: FormulationHandle, assignment: Assignment) -> StaticDeployment:
    """Positions from an integral-feasible assignment: exactly one placed
    cell per node; covered/uncovered computed from the geometry."""
    if handle.kind != "static":
        raise ValueError("handle is not a static-placement formulation")
    positions: List[Cell] = []
    for s in range(1, handle.n_static + 1):
        chosen: List[Cell] = []
        for cell in handle.grid.cells():
            val = assignment.get(handle.x_static[(s, cell)], 0.0)
            if abs(val - round(val)) > INT_TOL:
                raise DecodeError(f"placement variable for node {s} at {tuple(cell)} is fractional: {val}")
            if round(val) == 1:
                chosen.append(cell)
        if len(chosen) != 1:
            raise DecodeError(f"static node {s} placed in {len(chosen)} cells, expected exactly 1")
        positions.append(chosen[0])

    covered, uncovered = static_coverage(positions, handle.r_s, handle.grid)
    boundary = boundary_cells(handle.grid)
    objective = 0.0
    for pos in positions:
        for cell in sensing_footprint(pos, handle.r_s, handle.grid):
            objective += handle.boundary_weight if cell in boundary else 1.0
    return StaticDeployment(
        positions=tuple(positions),
        covered=frozenset(covered),
        uncovered=frozenset(uncovered),
        boundary_weight=handle.boundary_weight,
        objective_value=objective,
    )


def encode_static(handle: FormulationHandle, positions: Sequence[Tuple[int, int]]) -> Assignment:
    """Variable values realizing a concrete placement: placement binaries
    set, coverage variables equal to the footprint indicators.  Feasibility
    (the overlap cap) is the caller's to verify by substitution."""
    if handle.kind != "static":
        raise ValueError("handle is not a static-placement formulation")
    if len(positions) != handle.n_static:
        raise ValueError(f"expected {handle.n_static} positions, got {len(positions)}")
    values: Assignment = {vid: 0.0 for vid in range(handle.instance.n_variables)}
    for s, pos in enumerate(positions, start=1):
        cell = handle.grid.require(pos, "static position")
        values[handle.x_static[(s, cell)]] = 1.0
        for covered in sensing_footprint(cell, handle.r_s, handle.grid):
            values[handle.c_static[(s, covered)]] = 1.0
    return values


def _check_rho_components(uncovered: Sequence[Cell], rho_x: int, rho_y: int) -> None:
    """Warn when the uncovered set splits into components no single-step
    move can bridge (a node seeded in one component can never reach the
    others)."""
    cells = set(uncovered)
    if not cells or rho_x < 0 or rho_y < 0:
        return
    if rho_x >= 1 and rho_y >= 1:
        rows = {i for i, _ in cells}
        columns = {j for _, j in cells}
        if len(cells) == len(rows) * len(columns) and (
            max(rows) - min(rows) + 1 == len(rows)
            and max(columns) - min(columns) + 1 == len(columns)
        ):
            return  # a full rectangle is trivially step-connected
    seen = set()
    frontier = [min(cells)]
    seen.add(frontier[0])
    while frontier:
        i, j = frontier.pop()
        for p in range(i - rho_x, i + rho_x + 1):
            for q in range(j - rho_y, j + rho_y + 1):
                nxt = (p, q)
                if nxt in cells and nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
    if len(seen) != len(cells):
        warnings.warn(
            "uncovered set splits into step-unreachable components; "
            "single-node plans cannot cover all of it",
            UserWarning,
            stacklevel=3,
        )


def _build_mobile(
    kind: str,
    grid: GridSpec,
    uncovered: Sequence[Cell],
    n_mobile: int,
    k_max: int,
    r_s: int,
    rho_x: int,
    rho_y: int,
    c_o: int,
    static_covered_count: int = 0,
    coverage_threshold: Optional[int] = None,
) -> FormulationHandle:
    if n_mobile < 1:
        raise ValueError("n_mobile must be >= 1")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if c_o < 1:
        raise ValueError("c_o must be >= 1")

    c1 = sorted(set(Cell(*c) for c in uncovered))
    for cell in c1:
        grid.require(cell, "uncovered cell")
    inst = MilpInstance(f"milp-{kind}")
    handle = FormulationHandle(
        kind=kind,
        instance=inst,
        grid=grid,
        n_mobile=n_mobile,
        horizon=k_max,
        r_s=r_s,
        rho_x=rho_x,
        rho_y=rho_y,
        c_o=c_o,
        uncovered=tuple(c1),
        static_covered_count=static_covered_count,
        coverage_threshold=coverage_threshold,
    )
    if not c1:
        handle.nothing_to_plan = True
        return handle

    _check_rho_components(c1, rho_x, rho_y)
    c1_pos = {cell: idx for idx, cell in enumerate(c1)}
    n1 = len(c1)
    nodes = range(1, n_mobile + 1)
    iters = range(1, k_max + 1)
    n_lk = n_mobile * k_max
    lk_list = [(l, k) for l in nodes for k in iters]

    # id layout: x block, then per-(node, iteration) coverage block, then
    # per-cell coverage block; within blocks node-major, iteration, cell
    cm_base = n_lk * n1
    cc_base = 2 * n_lk * n1
    cell_tag = ["%d_%d" % cell for cell in c1]

    inst._bulk_variables(
        [p + tag for p in ("x_l%d_k%d_" % lk for lk in lk_list) for tag in cell_tag],
        "binary", 0.0, 1.0,
    )
    inst._bulk_variables(
        [p + tag for p in ("c_l%d_k%d_" % lk for lk in lk_list) for tag in cell_tag],
        "continuous", 0.0, 1.0,
    )
    inst._bulk_variables(["c_" + tag for tag in cell_tag], "continuous", 0.0, 1.0)

    if kind == "cov":
        inst.set_objective([(cc_base + p, 1.0) for p in range(n1)], "maximize")
    else:
        inst.set_objective([(v, 1.0) for v in range(n_lk * n1)], "minimize")

    cons_append = inst.constraints.append
    minus_ones = repeat(-1.0)

    # position: each node occupies one cell per iteration ("cov"), or at
    # most one so nodes may stop once the target is met ("mov")
    pos_sense = "=" if kind == "cov" else "<="
    for off in range(n_lk):
        base = off * n1
        cons_append(
            LinearConstraint(tuple(zip(range(base, base + n1), repeat(1.0))), pos_sense, 1.0)
        )

    if kind == "mov":
        # total coverage (static constant folded in) must reach the threshold
        cons_append(
            LinearConstraint(
                tuple(zip(range(cc_base, cc_base + n1), repeat(1.0))),
                ">=",
                float(coverage_threshold - static_covered_count),
            )
        )

    step_windows = [
        [c1_pos[w] for w in _clipped_box(cell, rho_x, rho_y, grid) if w in c1_pos]
        for cell in c1
    ]
    sense_windows = [
        [c1_pos[w] for w in _clipped_box(cell, r_s, r_s, grid) if w in c1_pos]
        for cell in c1
    ]

    # mobility: next position only within the step window of the current one
    for pos in range(n1):
        win = step_windows[pos]
        for l in nodes:
            node_base = (l - 1) * k_max * n1
            for k_base in range(node_base, node_base + (k_max - 1) * n1, n1):
                terms = ((k_base + n1 + pos, 1.0),) + tuple(
                    zip([k_base + w for w in win], minus_ones)
                )
                cons_append(LinearConstraint(terms, "<=", 0.0))
    # per-(node, iteration) coverage equals the footprint-window sum
    for pos in range(n1):
        win = sense_windows[pos]
        for off in range(n_lk):
            base = off * n1
            terms = ((cm_base + base + pos, 1.0),) + tuple(
                zip([base + w for w in win], minus_ones)
            )
            cons_append(LinearConstraint(terms, "=", 0.0))
    # covered-any-iteration lower bounds
    for pos in range(n1):
        cc_term = (cc_base + pos, 1.0)
        for off in range(n_lk):
            cons_append(
                LinearConstraint((cc_term, (cm_base + off * n1 + pos, -1.0)), ">=", 0.0)
            )
    # covered-any-iteration upper bound
    for pos in range(n1):
        terms = ((cc_base + pos, 1.0),) + tuple(
            zip(range(cm_base + pos, cm_base + n_lk * n1 + pos, n1), minus_ones)
        )
        cons_append(LinearConstraint(terms, "<=", 0.0))
    # overlap cap
    cap = float(c_o)
    for pos in range(n1):
        terms = tuple(zip(range(cm_base + pos, cm_base + n_lk * n1 + pos, n1), repeat(1.0)))
        cons_append(LinearConstraint(terms, "<=", cap))
    return handle


def build_milp_cov(
    grid: GridSpec,
    uncovered,
    n_mobile: int,
    k_max: int,
    r_s: int = 1,
    rho_x: int = 2,
    rho_y: int = 2,
    c_o: int = 3,
) -> FormulationHandle:
    """Coverage-maximization MILP over the uncovered set.

    An empty uncovered set yields a handle flagged `nothing_to_plan`
    (decode it to an empty plan, coverage contribution zero).
    """
    return _build_mobile(
        "cov", grid, uncovered, n_mobile, k_max, r_s, rho_x, rho_y, c_o
    )


def build_milp_mov(
    grid: GridSpec,
    uncovered,
    static_covered_count: int,
    n_mobile: int,
    k_max: int,
    r_s: int = 1,
    rho_x: int = 2,
    rho_y: int = 2,
    c_o: int = 3,
    coverage_target: Union[int, float, str, Fraction] = 1,
) -> FormulationHandle:
    """Movement-minimization MILP: fewest (node, iteration) placements such
    that total coverage (static count folded in as a constant) reaches
    `coverage_target` of the whole grid.  The required covered-cell count
    is ceil(target * |C|), computed in exact rational arithmetic.
    """
    target = _exact_fraction(coverage_target)
    if not 0 < target <= 1:
        raise ValueError("coverage_target must lie in (0, 1]")
    threshold = int(math.ceil(target * grid.n_cells))
    return _build_mobile(
        "mov",
        grid,
        uncovered,
        n_mobile,
        k_max,
        r_s,
        rho_x,
        rho_y,
        c_o,
        static_covered_count=static_covered_count,
        coverage_threshold=threshold,
    )


def decode_plan(handle: FormulationHandle, assignment: Assignment) -> MobilePlan:
    """Extract (node, iteration) positions from an integral-feasible
    assignment and verify the plan invariants; violations here indicate a
    builder bug and raise PlanConsistencyError."""
    if handle.kind not in ("cov", "mov"):
        raise ValueError("handle is not a mobile-path formulation")
    positions: Dict[Tuple[int, int], Cell] = {}
    if not handle.nothing_to_plan:
        for l in range(1, handle.n_mobile + 1):
            for k in range(1, handle.horizon + 1):
                chosen: List[Cell] = []
                for cell in handle.uncovered:
                    val = assignment.get(handle.x_mobile[(l, k, cell)], 0.0)
                    if abs(val - round(val)) > INT_TOL:
                        raise DecodeError(
                            f"position variable node {l} iteration {k} at {tuple(cell)} is fractional: {val}"
                        )
                    if round(val) == 1:
                        chosen.append(cell)
                if len(chosen) > 1:
                    raise DecodeError(
                        f"node {l} occupies {len(chosen)} cells at iteration {k}"
                    )
                if handle.kind == "cov" and not chosen:
                    raise DecodeError(f"node {l} has no position at iteration {k}")
                if chosen:
                    positions[(l, k)] = chosen[0]

    plan = MobilePlan(n_mobile=handle.n_mobile, horizon=handle.horizon, positions=positions)
    problems = validate_plan(plan, handle.grid, handle.uncovered, handle.rho_x, handle.rho_y)
    if problems:
        raise PlanConsistencyError(
            "decoded plan violates its invariants (builder bug): "
            + "; ".join(v.message for v in problems)
        )
    return plan


def encode_plan(handle: FormulationHandle, plan: MobilePlan) -> Assignment:
    """Variable values realizing `plan` in the handle's instance: positions
    set the placement binaries, coverage variables follow from the
    footprints.  Feasibility (notably the overlap cap) is not checked
    here; substitute into the instance to verify."""
    values: Assignment = {vid: 0.0 for vid in range(handle.instance.n_variables)}
    if handle.nothing_to_plan:
        return values
    c1_set = set(handle.uncovered)
    covered: Set[Cell] = set()
    for (l, k), pos in plan.positions.items():
        if (l, k, pos) not in handle.x_mobile:
            raise ValueError(f"plan position {tuple(pos)} at node {l} iteration {k} has no variable")
        values[handle.x_mobile[(l, k, pos)]] = 1.0
        for cell in sensing_footprint(pos, handle.r_s, handle.grid):
            if cell in c1_set:
                values[handle.c_mobile[(l, k, cell)]] = 1.0
                covered.add(cell)
    for cell in covered:
        values[handle.c_cell[cell]] = 1.0
    return values


def validate_plan(
    plan: MobilePlan,
    grid: GridSpec,
    uncovered,
    rho_x: int,
    rho_y: int,
) -> List[PlanViolation]:
    """Check plan invariants; violations are returned as data, the empty
    list meaning the plan is valid.

    Checks: positions on the grid and inside the uncovered set, step
    displacements within (rho_x, rho_y) for consecutive present positions,
    and stop-monotonicity (once absent, absent for good).
    """
    violations: List[PlanViolation] = []
    c1_set = set(Cell(*c) for c in uncovered)
    for l in range(1, plan.n_mobile + 1):
        prev: Optional[Cell] = None
        stopped = False
        for k in range(1, plan.horizon + 1):
            pos = plan.positions.get((l, k))
            if pos is None:
                stopped = True
                continue
            if stopped:
                violations.append(
                    PlanViolation(
                        "stop", l, k,
                        f"node {l} resumes at iteration {k} after stopping",
                    )
                )
            if pos not in grid:
                violations.append(
                    PlanViolation("grid", l, k, f"node {l} at {tuple(pos)} is off-grid at iteration {k}")
                )
            elif pos not in c1_set:
                violations.append(
                    PlanViolation(
                        "membership", l, k,
                        f"node {l} at {tuple(pos)} is outside the uncovered set at iteration {k}",
                    )
                )
            if prev is not None and not stopped:
                if abs(pos.i - prev.i) > rho_x or abs(pos.j - prev.j) > rho_y:
                    violations.append(
                        PlanViolation(
                            "mobility", l, k,
                            f"node {l} step {tuple(prev)} -> {tuple(pos)} exceeds ({rho_x}, {rho_y})",
                        )
                    )
            prev = pos if not stopped else prev
    return violations
