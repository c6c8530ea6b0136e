"""Experiment orchestration: placement stage, planning stage, exact
coverage accounting, and machine-readable persistence.

A pipeline run is: (1) place static nodes (exact MILP or seeded uniform
random without replacement), (2) compute the uncovered set, (3) run the
selected planner (exact coverage/movement MILP or a baseline), (4)
recompute coverage and movement counts from the stored plan (solver
objectives are never trusted for reporting).  One result row per seed.

Exact solves are warm-started with constructive heuristics (a packing
search for placement, an overlap-respecting greedy for paths); seeding
only tightens pruning and never affects correctness.  Deployments, plans
and result rows are persisted as line-oriented text so every reported
number can be re-derived offline.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .bnb import MilpResult, SolveParams, solve_milp
from .formulations import (
    FormulationHandle,
    MobilePlan,
    StaticDeployment,
    _exact_fraction,
    build_milp_cov,
    build_milp_mov,
    build_milp_static,
    decode_plan,
    decode_static,
    encode_plan,
    encode_static,
)
from .grid import Cell, GridSpec, SensorParams, boundary_cells, sensing_footprint, static_coverage
from .planners import BaselineConfig, greedy_plan, movements_to_reach, random_plan

PLACEMENTS = ("milp-static", "random-static", "none")
PLANNERS = ("milp-cov", "milp-mov", "greedy", "random", "none")


@dataclass(frozen=True)
class ExperimentConfig:
    """One pipeline configuration. Defaults mirror the reference setup:
    r_s=1, rho=2, c_o=1 for placement and 3 for path planning, boundary
    weight 4, 18000 s time limit, zero gap."""

    rows: int = 8
    cols: int = 8
    n_static: int = 0
    n_mobile: int = 1
    k_max: int = 4
    r_s: int = 1
    rho_x: int = 2
    rho_y: int = 2
    c_o_static: int = 1
    c_o_mobile: int = 3
    boundary_weight: float = 4.0
    coverage_target: Union[int, float, str] = 1
    placement: str = "milp-static"
    planner: str = "milp-cov"
    seeds: Tuple[int, ...] = (0,)
    time_limit: float = 18000.0
    mip_gap: float = 0.0
    node_limit: Optional[int] = None
    deterministic: bool = True
    warm_start: bool = True

    def __post_init__(self) -> None:
        if self.placement not in PLACEMENTS:
            raise ValueError(f"placement must be one of {PLACEMENTS}")
        if self.planner not in PLANNERS:
            raise ValueError(f"planner must be one of {PLANNERS}")
        if self.placement == "none" and self.n_static:
            raise ValueError("placement 'none' requires n_static == 0")
        if self.placement != "none" and self.n_static < 1:
            raise ValueError("static placement requires n_static >= 1")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.rows, self.cols)

    @property
    def sensor_params(self) -> SensorParams:
        return SensorParams(self.r_s, self.rho_x, self.rho_y, self.c_o_mobile)

    def solver_params(self) -> SolveParams:
        return SolveParams(
            time_limit=self.time_limit,
            mip_gap=self.mip_gap,
            node_limit=self.node_limit,
            deterministic=self.deterministic,
        )


@dataclass
class ResultRow:
    """Self-describing outcome of one (config, seed) pipeline run."""

    rows: int
    cols: int
    n_static: int
    n_mobile: int
    k_max: int
    r_s: int
    rho_x: int
    rho_y: int
    c_o_static: int
    c_o_mobile: int
    boundary_weight: float
    coverage_target: str
    placement: str
    planner: str
    seed: int
    coverage_pct: float
    covered_cells: int
    total_cells: int
    movements_raw: int
    movements_trimmed: int
    movements_to_target: Optional[int]
    solver_status: str
    objective: Optional[float]
    best_bound: Optional[float]
    gap: Optional[float]
    wall_time: float
    note: str = ""
    deployment: Optional[StaticDeployment] = None
    plan: Optional[MobilePlan] = None


# ---------------------------------------------------------------------------
# warm-start heuristics
# ---------------------------------------------------------------------------


def pack_static_positions(
    grid: GridSpec,
    n_static: int,
    r_s: int,
    c_o: int,
    boundary_weight: float,
    step_budget: int = 400_000,
) -> Optional[List[Cell]]:
    """Best placement found by a bounded depth-first packing search.

    Positions are chosen as a non-decreasing sequence over cells sorted by
    single-placement value (killing node-permutation symmetry); branches
    whose optimistic bound (current + remaining * best-available single
    value) cannot beat the best found are pruned.  Within the step budget
    on desk-scale grids this is exhaustive, i.e. optimal.
    """
    boundary = boundary_cells(grid)
    weight = {c: (boundary_weight if c in boundary else 1.0) for c in grid.cells()}
    cells = sorted(grid.cells())
    footprints = {c: sorted(sensing_footprint(c, r_s, grid)) for c in cells}
    value = {c: sum(weight[f] for f in footprints[c]) for c in cells}
    order = sorted(cells, key=lambda c: (-value[c], c))
    vals = [value[c] for c in order]

    best_obj = -1.0
    best: Optional[List[Cell]] = None
    counts: Dict[Cell, int] = {}
    chosen: List[Cell] = []
    steps = 0

    def feasible(cell: Cell) -> bool:
        return all(counts.get(f, 0) < c_o for f in footprints[cell])

    def dfs(start_idx: int, current: float) -> None:
        nonlocal best_obj, best, steps
        steps += 1
        if steps > step_budget:
            return
        remaining = n_static - len(chosen)
        if remaining == 0:
            if current > best_obj:
                best_obj, best = current, list(chosen)
            return
        for idx in range(start_idx, len(order)):
            if current + remaining * vals[idx] <= best_obj:
                break  # vals non-increasing: no later cell can help
            cell = order[idx]
            if not feasible(cell):
                continue
            for f in footprints[cell]:
                counts[f] = counts.get(f, 0) + 1
            chosen.append(cell)
            dfs(idx, current + vals[idx])
            chosen.pop()
            for f in footprints[cell]:
                counts[f] -= 1

    dfs(0, 0.0)
    return best


def seed_mobile_plan(
    grid: GridSpec,
    uncovered: Sequence[Cell],
    n_mobile: int,
    k_max: int,
    r_s: int,
    rho_x: int,
    rho_y: int,
    c_o: int,
    stop_at: Optional[int] = None,
    first_start: Optional[Cell] = None,
) -> Optional[MobilePlan]:
    """Overlap-respecting greedy plan confined to the uncovered set, used to
    seed the exact solves.  Nodes pick the feasible reachable cell with the
    largest new-coverage gain (ties lexicographic).  With `stop_at` set
    (movement minimization), planning stops once that many uncovered cells
    are covered, zero-gain moves become transit moves toward the nearest
    uncovered cell, and stuck nodes stop; without it every node must be
    placed each iteration and a stuck node aborts the seeding (None).
    `first_start` pins node 1's initial cell (multi-start restarts).
    """
    c1 = sorted(set(Cell(*c) for c in uncovered))
    if not c1:
        return MobilePlan(n_mobile=n_mobile, horizon=k_max, positions={})
    c1_set = set(c1)
    fp = {c: [f for f in sensing_footprint(c, r_s, grid) if f in c1_set] for c in c1}
    win = {c: sorted(f for f in c1 if abs(f.i - c.i) <= rho_x and abs(f.j - c.j) <= rho_y) for c in c1}

    counts: Dict[Cell, int] = {c: 0 for c in c1}
    covered: Set[Cell] = set()
    positions: Dict[Tuple[int, int], Cell] = {}
    current: Dict[int, Optional[Cell]] = {l: None for l in range(1, n_mobile + 1)}
    stopped: Set[int] = set()

    def feasible(cell: Cell) -> bool:
        return all(counts[f] < c_o for f in fp[cell])

    def place(l: int, k: int, cell: Cell) -> None:
        positions[(l, k)] = cell
        current[l] = cell
        for f in fp[cell]:
            counts[f] += 1
            covered.add(f)

    def transit_choice(cands: List[Cell]) -> Optional[Cell]:
        hole = sorted(c1_set - covered)
        if not hole:
            return None
        best_cell, best_d = None, math.inf
        for cand in cands:
            d = min(max(abs(cand.i - h.i), abs(cand.j - h.j)) for h in hole)
            if d < best_d:
                best_cell, best_d = cand, d
        return best_cell

    def cap_pressure(cell: Cell) -> Tuple[int, int]:
        # prefer parking spots that exhaust the fewest cells' remaining cap
        exhausted = sum(1 for f in fp[cell] if counts[f] + 1 >= c_o)
        return exhausted, len(fp[cell])

    for k in range(1, k_max + 1):
        for l in range(1, n_mobile + 1):
            if l in stopped:
                continue
            if stop_at is not None and len(covered) >= stop_at:
                stopped.add(l)
                continue
            cands = c1 if current[l] is None else win[current[l]]
            if first_start is not None and l == 1 and k == 1:
                cands = [Cell(*first_start)]
            cands = [c for c in cands if feasible(c)]
            if not cands:
                if stop_at is None:
                    return None  # coverage plans must place every node
                stopped.add(l)
                continue
            best_cell, best_gain = None, -1
            for cand in cands:
                gain = sum(1 for f in fp[cand] if f not in covered)
                if gain > best_gain:
                    best_cell, best_gain = cand, gain
            if best_gain == 0:
                if stop_at is not None:
                    best_cell = transit_choice(cands)
                    if best_cell is None:
                        stopped.add(l)
                        continue
                else:
                    best_cell = min(cands, key=lambda c: (cap_pressure(c), c))
            place(l, k, best_cell)
    return MobilePlan(n_mobile=n_mobile, horizon=k_max, positions=positions)


def best_seed_plan(
    grid: GridSpec,
    uncovered: Sequence[Cell],
    n_mobile: int,
    k_max: int,
    r_s: int,
    rho_x: int,
    rho_y: int,
    c_o: int,
    stop_at: Optional[int] = None,
) -> Optional[MobilePlan]:
    """Best greedy seed over all first-node start cells (plus the free
    default), scored by uncovered cells covered then fewer placements;
    stops early once a seed covers everything."""
    c1 = sorted(set(Cell(*c) for c in uncovered))
    c1_set = set(c1)

    def covered_by(plan: MobilePlan) -> int:
        hit = set()
        for pos in plan.positions.values():
            hit.update(f for f in sensing_footprint(pos, r_s, grid) if f in c1_set)
        return len(hit)

    best: Optional[MobilePlan] = None
    best_key = (-1, 0)
    for start in [None] + c1:
        plan = seed_mobile_plan(
            grid, c1, n_mobile, k_max, r_s, rho_x, rho_y, c_o,
            stop_at=stop_at, first_start=start,
        )
        if plan is None:
            continue
        key = (covered_by(plan), -plan.movements)
        if key > best_key:
            best, best_key = plan, key
        if best_key[0] == len(c1):
            break
    return best


def _warm_assignment(handle: FormulationHandle, plan: Optional[MobilePlan]):
    if plan is None:
        return None
    values = encode_plan(handle, plan)
    if handle.instance.constraint_violation(values) > 1e-7:
        return None
    return values


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------


def _deployment_from_positions(
    grid: GridSpec, positions: Sequence[Cell], r_s: int, boundary_weight: float
) -> StaticDeployment:
    covered, uncovered = static_coverage(list(positions), r_s, grid)
    boundary = boundary_cells(grid)
    objective = sum(
        boundary_weight if cell in boundary else 1.0
        for pos in positions
        for cell in sensing_footprint(pos, r_s, grid)
    )
    return StaticDeployment(
        positions=tuple(Cell(*p) for p in positions),
        covered=frozenset(covered),
        uncovered=frozenset(uncovered),
        boundary_weight=boundary_weight,
        objective_value=objective,
    )


def place_static_milp(
    config: ExperimentConfig,
) -> Tuple[Optional[StaticDeployment], MilpResult]:
    """Stage 1, exact variant: build, warm-start, solve and decode."""
    grid = config.grid
    handle = build_milp_static(
        grid, config.n_static, config.r_s, config.c_o_static, config.boundary_weight
    )
    warm = None
    if config.warm_start:
        packed = pack_static_positions(
            grid, config.n_static, config.r_s, config.c_o_static, config.boundary_weight
        )
        if packed is not None:
            values = encode_static(handle, packed)
            if handle.instance.constraint_violation(values) <= 1e-7:
                warm = values
    result = solve_milp(handle.instance, config.solver_params(), warm_start=warm)
    if result.incumbent is None:
        return None, result
    return decode_static(handle, result.incumbent), result


def place_static_random(config: ExperimentConfig, seed: int) -> StaticDeployment:
    """Stage 1, baseline variant: uniform placement without replacement."""
    grid = config.grid
    cells = sorted(grid.cells())
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0])))
    idx = rng.choice(len(cells), size=config.n_static, replace=False)
    positions = [cells[int(i)] for i in sorted(idx)]
    return _deployment_from_positions(grid, positions, config.r_s, config.boundary_weight)


def plan_mobile_milp(
    config: ExperimentConfig, deployment: Optional[StaticDeployment]
) -> Tuple[FormulationHandle, Optional[MobilePlan], MilpResult]:
    """Stages 2-3, exact variants: build the selected formulation over the
    uncovered set, seed it, solve, decode the incumbent."""
    grid = config.grid
    covered = set(deployment.covered) if deployment is not None else set()
    uncovered = sorted(set(grid.cells()) - covered)

    if config.planner == "milp-cov":
        handle = build_milp_cov(
            grid, uncovered, config.n_mobile, config.k_max,
            config.r_s, config.rho_x, config.rho_y, config.c_o_mobile,
        )
        stop_at = None
    else:
        handle = build_milp_mov(
            grid, uncovered, len(covered), config.n_mobile, config.k_max,
            config.r_s, config.rho_x, config.rho_y, config.c_o_mobile,
            coverage_target=config.coverage_target,
        )
        stop_at = None
        if handle.coverage_threshold is not None:
            stop_at = max(0, handle.coverage_threshold - len(covered))

    if handle.nothing_to_plan:
        empty = MobilePlan(n_mobile=config.n_mobile, horizon=config.k_max, positions={})
        result = MilpResult("optimal", {}, 0.0, 0.0, 0.0, 0)
        return handle, empty, result

    params = config.solver_params()
    params.objective_integral = True  # coverage variables behave as binaries

    warm = None
    if config.warm_start:
        seeded = best_seed_plan(
            grid, uncovered, config.n_mobile, config.k_max,
            config.r_s, config.rho_x, config.rho_y, config.c_o_mobile,
            stop_at=stop_at,
        )
        if seeded is not None and stop_at is not None:
            reached = len({f for p in seeded.positions.values()
                           for f in sensing_footprint(p, config.r_s, grid) if f in set(uncovered)})
            if reached < stop_at:
                seeded = None  # seed failed to reach the target; useless as incumbent
        warm = _warm_assignment(handle, seeded)
        if warm is None:
            # greedy seeding cornered itself: hunt for any incumbent with a
            # short deterministic depth-first dive before the main search
            hunt = solve_milp(
                handle.instance,
                SolveParams(
                    time_limit=min(60.0, config.time_limit),
                    node_selection="depth-first",
                    node_limit=400,
                    objective_integral=True,
                ),
            )
            warm = hunt.incumbent

    result = solve_milp(handle.instance, params, warm_start=warm)
    if result.incumbent is None:
        return handle, None, result
    return handle, decode_plan(handle, result.incumbent), result


def trimmed_movements(
    plan: Optional[MobilePlan],
    deployment: Optional[StaticDeployment],
    params: SensorParams,
    grid: GridSpec,
) -> int:
    """Placement count up to the last placement that added new coverage,
    scanning in (iteration, node) ascending order; trailing no-gain
    placements are dropped."""
    if plan is None:
        return 0
    covered: Set[Cell] = set(deployment.covered) if deployment is not None else set()
    count = 0
    last_gain = 0
    for k in range(1, plan.horizon + 1):
        for l in range(1, plan.n_mobile + 1):
            pos = plan.positions.get((l, k))
            if pos is None:
                continue
            count += 1
            fresh = sensing_footprint(pos, params.r_s, grid) - covered
            if fresh:
                last_gain = count
                covered |= fresh
    return last_gain


def run_pipeline(config: ExperimentConfig) -> List[ResultRow]:
    """Run the full pipeline once per seed; solver trouble is recorded in
    the row, never fatal to the batch."""
    grid = config.grid
    params = config.sensor_params
    rows: List[ResultRow] = []

    milp_deployment: Optional[StaticDeployment] = None
    milp_depl_result: Optional[MilpResult] = None
    if config.placement == "milp-static":
        milp_deployment, milp_depl_result = place_static_milp(config)

    for seed in config.seeds:
        t0 = time.monotonic()
        note = ""
        status = "ok"
        objective = bound = gap = None

        if config.placement == "milp-static":
            deployment = milp_deployment
            if deployment is None:
                rows.append(self_describing_row(config, seed, None, None, "infeasible",
                                                None, None, None, time.monotonic() - t0,
                                                "static placement infeasible"))
                continue
        elif config.placement == "random-static":
            deployment = place_static_random(config, seed)
        else:
            deployment = None

        plan: Optional[MobilePlan] = None
        if config.planner in ("milp-cov", "milp-mov"):
            try:
                _, plan, result = plan_mobile_milp(config, deployment)
                status = result.status
                objective, bound, gap = result.objective, result.best_bound, result.gap
                if plan is None and status == "infeasible" and config.planner == "milp-mov":
                    note = "coverage target unreachable: increase k_max or n_mobile"
                elif plan is None:
                    note = "no incumbent within limits"
            except ValueError as exc:
                status, note = "error", str(exc)
        elif config.planner == "greedy":
            plan = greedy_plan(grid, deployment, _baseline_cfg(config, seed))
        elif config.planner == "random":
            plan = random_plan(grid, deployment, _baseline_cfg(config, seed))

        rows.append(self_describing_row(
            config, seed, deployment, plan, status, objective, bound, gap,
            time.monotonic() - t0, note,
        ))
    return rows


def _baseline_cfg(config: ExperimentConfig, seed: int) -> BaselineConfig:
    return BaselineConfig(
        n_mobile=config.n_mobile,
        k_max=config.k_max,
        r_s=config.r_s,
        rho_x=config.rho_x,
        rho_y=config.rho_y,
        seed=seed,
    )


def self_describing_row(
    config: ExperimentConfig,
    seed: int,
    deployment: Optional[StaticDeployment],
    plan: Optional[MobilePlan],
    status: str,
    objective: Optional[float],
    bound: Optional[float],
    gap: Optional[float],
    wall_time: float,
    note: str = "",
) -> ResultRow:
    """Assemble a row, recomputing coverage from the stored plan."""
    from .grid import evaluate_plan  # local import keeps module load order simple

    grid = config.grid
    params = config.sensor_params
    report = evaluate_plan(deployment, plan, params, grid)
    return ResultRow(
        rows=config.rows,
        cols=config.cols,
        n_static=config.n_static,
        n_mobile=config.n_mobile,
        k_max=config.k_max,
        r_s=config.r_s,
        rho_x=config.rho_x,
        rho_y=config.rho_y,
        c_o_static=config.c_o_static,
        c_o_mobile=config.c_o_mobile,
        boundary_weight=config.boundary_weight,
        coverage_target=str(config.coverage_target),
        placement=config.placement,
        planner=config.planner,
        seed=seed,
        coverage_pct=report.coverage_pct,
        covered_cells=report.covered_count,
        total_cells=report.total_cells,
        movements_raw=report.movements,
        movements_trimmed=trimmed_movements(plan, deployment, params, grid),
        movements_to_target=movements_to_reach(plan, deployment, params, grid, config.coverage_target)
        if plan is not None
        else (0 if deployment is not None and _static_meets_target(config, deployment) else None),
        solver_status=status,
        objective=objective,
        best_bound=bound,
        gap=gap,
        wall_time=wall_time,
        note=note,
        deployment=deployment,
        plan=plan,
    )


def _static_meets_target(config: ExperimentConfig, deployment: StaticDeployment) -> bool:
    target = _exact_fraction(config.coverage_target)
    return Fraction(len(deployment.covered), config.grid.n_cells) >= target


def sweep(base: ExperimentConfig, axes: Dict[str, Sequence]) -> List[ResultRow]:
    """Cartesian sweep over config fields; rows ordered by config index
    (sorted axis names, values in given order), one row per seed.  Per-cell
    failures are recorded as error rows and the sweep continues."""
    if not axes:
        return []
    names = sorted(axes)
    out: List[ResultRow] = []
    for combo in itertools.product(*(axes[n] for n in names)):
        cfg = replace(base, **dict(zip(names, combo)))
        try:
            out.extend(run_pipeline(cfg))
        except Exception as exc:  # pragma: no cover - defensive
            for seed in cfg.seeds:
                out.append(self_describing_row(cfg, seed, None, None, "error",
                                               None, None, None, 0.0, str(exc)))
    return out


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

RESULT_COLUMNS = [
    "rows", "cols", "n_static", "n_mobile", "k_max", "r_s", "rho_x", "rho_y",
    "c_o_static", "c_o_mobile", "boundary_weight", "coverage_target",
    "placement", "planner", "seed", "coverage_pct", "covered_cells",
    "total_cells", "movements_raw", "movements_trimmed", "movements_to_target",
    "solver_status", "objective", "best_bound", "gap", "wall_time", "note",
]


def _csv_field(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    if "," in text or '"' in text or "\n" in text:
        text = '"' + text.replace('"', '""') + '"'
    return text


def results_csv(rows: Sequence[ResultRow], deterministic: bool = False) -> str:
    """Fixed-header CSV; with `deterministic`, the wall_time field is left
    empty so identical runs produce byte-identical files."""
    lines = [",".join(RESULT_COLUMNS)]
    for row in rows:
        record = []
        for col in RESULT_COLUMNS:
            value = getattr(row, col)
            if col == "wall_time" and deterministic:
                value = None
            record.append(_csv_field(value))
        lines.append(",".join(record))
    return "\n".join(lines) + "\n"


def plan_text(plan: MobilePlan) -> str:
    """Line-oriented plan: `l k i j` per placement, (l, k) ascending."""
    lines = [f"{l} {k} {pos.i} {pos.j}" for (l, k), pos in sorted(plan.positions.items())]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_plan_text(text: str, n_mobile: int, horizon: int) -> MobilePlan:
    positions: Dict[Tuple[int, int], Cell] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"plan line {ln}: expected 'l k i j', got {raw!r}")
        l, k, i, j = (int(p) for p in parts)
        positions[(l, k)] = Cell(i, j)
    return MobilePlan(n_mobile=n_mobile, horizon=horizon, positions=positions)


def deployment_text(deployment: StaticDeployment) -> str:
    """Line-oriented deployment: `s i j` per static node."""
    lines = [f"{s} {pos.i} {pos.j}" for s, pos in enumerate(deployment.positions, start=1)]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_deployment_text(
    text: str, grid: GridSpec, r_s: int, boundary_weight: float = 4.0
) -> StaticDeployment:
    entries: Dict[int, Cell] = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"deployment line {ln}: expected 's i j', got {raw!r}")
        s, i, j = (int(p) for p in parts)
        entries[s] = grid.require(Cell(i, j), "deployment position")
    positions = [entries[s] for s in sorted(entries)]
    return _deployment_from_positions(grid, positions, r_s, boundary_weight)
