"""Pipeline orchestration, persistence, and warm-start seeding."""

from fractions import Fraction

import pytest

from gridcover.formulations import MobilePlan, build_milp_cov, encode_plan
from gridcover.grid import Cell, GridSpec, SensorParams, evaluate_plan, static_coverage
from gridcover.harness import (
    ExperimentConfig,
    deployment_text,
    pack_static_positions,
    parse_deployment_text,
    parse_plan_text,
    plan_text,
    results_csv,
    run_pipeline,
    seed_mobile_plan,
    sweep,
    trimmed_movements,
)
from gridcover.simplex import FEAS_TOL


def tiny_config(**kw):
    defaults = dict(
        rows=3, cols=3, n_static=1, n_mobile=1, k_max=2,
        placement="milp-static", planner="milp-cov", seeds=(0,),
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


class TestRunPipeline:
    def test_static_plus_cov_covers_3x3(self):
        rows = run_pipeline(tiny_config())
        assert len(rows) == 1
        row = rows[0]
        # the center placement already covers everything: nothing to plan
        assert row.coverage_pct == pytest.approx(100.0)
        assert row.solver_status == "optimal"
        assert row.plan is not None and row.plan.movements == 0

    def test_row_per_seed_and_coverage_recomputed(self):
        config = tiny_config(rows=5, cols=5, n_static=0, placement="none",
                             planner="greedy", n_mobile=2, k_max=3,
                             seeds=(0, 1, 2))
        rows = run_pipeline(config)
        assert len(rows) == 3
        for row in rows:
            report = evaluate_plan(row.deployment, row.plan, config.sensor_params, config.grid)
            assert row.covered_cells == report.covered_count
            assert row.movements_raw == report.movements

    def test_random_static_without_replacement(self):
        config = tiny_config(rows=6, cols=6, n_static=8, placement="random-static",
                             planner="random", n_mobile=1, k_max=2, seeds=(3,))
        row = run_pipeline(config)[0]
        assert len(set(row.deployment.positions)) == 8
        again = run_pipeline(config)[0]
        assert again.deployment.positions == row.deployment.positions

    def test_mov_infeasible_recorded_not_fatal(self):
        config = tiny_config(rows=5, cols=5, n_static=0, placement="none",
                             planner="milp-mov", n_mobile=1, k_max=1,
                             coverage_target=1)
        rows = run_pipeline(config)
        assert len(rows) == 1
        assert rows[0].solver_status == "infeasible"
        assert "increase" in rows[0].note

    def test_config_validation(self):
        with pytest.raises(ValueError):
            tiny_config(placement="magic")
        with pytest.raises(ValueError):
            tiny_config(placement="none", n_static=2)


class TestSweep:
    def test_rows_for_every_combination(self):
        base = tiny_config(rows=4, cols=4, n_static=0, placement="none",
                           planner="greedy", seeds=(0, 1))
        rows = sweep(base, {"n_mobile": [1, 2], "k_max": [2, 3]})
        assert len(rows) == 2 * 2 * 2
        combos = [(r.n_mobile, r.k_max, r.seed) for r in rows]
        # axes iterate in sorted-name order: k_max outer, n_mobile inner
        assert combos == [
            (1, 2, 0), (1, 2, 1), (2, 2, 0), (2, 2, 1),
            (1, 3, 0), (1, 3, 1), (2, 3, 0), (2, 3, 1),
        ]

    def test_empty_sweep(self):
        assert sweep(tiny_config(), {}) == []
        assert sweep(tiny_config(), {"n_mobile": []}) == []


class TestPersistence:
    def test_plan_text_roundtrip(self):
        plan = MobilePlan(2, 3, {
            (1, 1): Cell(2, 2), (1, 2): Cell(3, 4), (2, 1): Cell(5, 5),
        })
        text = plan_text(plan)
        assert text.splitlines() == ["1 1 2 2", "1 2 3 4", "2 1 5 5"]
        back = parse_plan_text(text, 2, 3)
        assert back.positions == plan.positions

    def test_deployment_text_roundtrip(self):
        grid = GridSpec(6, 6)
        covered, uncovered = static_coverage([Cell(2, 2), Cell(5, 5)], 1, grid)
        text = "1 2 2\n2 5 5\n"
        deployment = parse_deployment_text(text, grid, 1, 4.0)
        assert deployment.positions == (Cell(2, 2), Cell(5, 5))
        assert deployment.covered == frozenset(covered)
        assert deployment_text(deployment) == text

    def test_results_csv_deterministic_mode(self):
        config = tiny_config(rows=4, cols=4, n_static=0, placement="none",
                             planner="random", seeds=(0, 1))
        a = results_csv(run_pipeline(config), deterministic=True)
        b = results_csv(run_pipeline(config), deterministic=True)
        assert a == b
        header = a.splitlines()[0]
        assert header.startswith("rows,cols,n_static,")
        assert "wall_time" in header
        # wall_time column is blank in deterministic files
        for line in a.splitlines()[1:]:
            assert line.split(",")[-2] == ""

    def test_csv_quotes_notes(self):
        config = tiny_config(rows=5, cols=5, n_static=0, placement="none",
                             planner="milp-mov", n_mobile=1, k_max=1)
        text = results_csv(run_pipeline(config))
        assert '"' in text or "increase" in text


class TestWarmStartHelpers:
    def test_pack_matches_exhaustive_small(self):
        from oracles import best_static_placement
        from gridcover.grid import sensing_footprint

        grid = GridSpec(5, 5)
        want, argbest = best_static_placement(grid, 2, 1, 1, 4.0)
        packed = pack_static_positions(grid, 2, 1, 1, 4.0)
        got = sum(
            (4.0 if c.i in (1, 5) or c.j in (1, 5) else 1.0)
            for p in packed
            for c in sensing_footprint(p, 1, grid)
        )
        assert got == pytest.approx(want)

    def test_seeded_cov_plan_is_instance_feasible(self):
        grid = GridSpec(8, 8)
        covered, uncovered = static_coverage([Cell(2, 2), Cell(7, 7)], 1, grid)
        c1 = sorted(uncovered)
        plan = seed_mobile_plan(grid, c1, 2, 4, 1, 2, 2, 3)
        assert plan is not None
        handle = build_milp_cov(grid, c1, 2, 4)
        values = encode_plan(handle, plan)
        assert handle.instance.constraint_violation(values) <= FEAS_TOL

    def test_seeded_mov_plan_stops_at_target(self):
        grid = GridSpec(6, 6)
        c1 = sorted(grid.cells())
        plan = seed_mobile_plan(grid, c1, 2, 4, 1, 2, 2, 3, stop_at=20)
        covered = set()
        from gridcover.grid import sensing_footprint

        for pos in plan.positions.values():
            covered |= sensing_footprint(pos, 1, grid)
        assert len(covered) >= 20

    def test_trimmed_movements_drops_trailing_no_gain(self):
        grid = GridSpec(3, 3)
        plan = MobilePlan(1, 3, {
            (1, 1): Cell(2, 2), (1, 2): Cell(1, 1), (1, 3): Cell(2, 2),
        })
        assert trimmed_movements(plan, None, SensorParams(), grid) == 1
