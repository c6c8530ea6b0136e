"""Bounded-variable simplex against brute-force vertex enumeration."""

import math

import numpy as np
import pytest

from gridcover.milp import MilpInstance
from gridcover.simplex import FEAS_TOL, LpData, solve_lp

from oracles import lp_by_vertex_enumeration


def build(c, A, senses, b, lower, upper, maximize=True):
    m = MilpInstance()
    n = len(c)
    for j in range(n):
        m.add_variable(f"v{j}", "continuous", lower[j], upper[j])
    for r in range(len(senses)):
        terms = [(j, A[r][j]) for j in range(n) if A[r][j] != 0.0]
        m.add_constraint(terms, senses[r], b[r])
    m.set_objective([(j, c[j]) for j in range(n) if c[j] != 0.0], "maximize" if maximize else "minimize")
    return m


def residuals_ok(instance, values):
    return instance.constraint_violation(values) <= FEAS_TOL


class TestBasics:
    def test_bound_only_maximum(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0, 1)
        m.set_objective([(x, 1.0)], "maximize")
        res = solve_lp(m)
        assert res.status == "optimal"
        assert res.values == {0: 1.0}
        assert res.objective == 1.0

    def test_two_variable_vertex(self):
        # oracle-checked: max 3x + 2y, x+y <= 4, x <= 2, 0 <= x,y <= 10
        c = np.array([3.0, 2.0])
        A = np.array([[1.0, 1.0], [1.0, 0.0]])
        b = np.array([4.0, 2.0])
        lower, upper = np.zeros(2), np.full(2, 10.0)
        want = lp_by_vertex_enumeration(c, A, ["<=", "<="], b, lower, upper, True)
        assert want == pytest.approx(10.0)
        res = solve_lp(build(c, A, ["<=", "<="], b, lower, upper))
        assert res.status == "optimal"
        assert res.objective == pytest.approx(10.0, abs=1e-9)
        assert res.values[0] == pytest.approx(2.0)
        assert res.values[1] == pytest.approx(2.0)

    def test_conflicting_rows_infeasible(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0, 1)
        m.add_constraint([(x, 1.0)], ">=", 1.0)
        m.add_constraint([(x, 1.0)], "<=", 0.0)
        m.set_objective([(x, 1.0)], "maximize")
        assert solve_lp(m).status == "infeasible"

    def test_unbounded(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0, math.inf)
        m.add_constraint([(x, 1.0)], ">=", 0.0)
        m.set_objective([(x, 1.0)], "maximize")
        assert solve_lp(m).status == "unbounded"

    def test_free_variable_minimum(self):
        m = MilpInstance()
        y = m.add_variable("y", "continuous", -math.inf, math.inf)
        m.add_constraint([(y, 1.0)], ">=", -3.0)
        m.set_objective([(y, 1.0)], "minimize")
        res = solve_lp(m)
        assert res.status == "optimal" and res.objective == pytest.approx(-3.0)

    def test_fixed_variables_respected(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0.5, 0.5)
        y = m.add_variable("y", "continuous", 0, 1)
        m.add_constraint([(x, 1.0), (y, 1.0)], "<=", 1.0)
        m.set_objective([(x, 1.0), (y, 1.0)], "maximize")
        res = solve_lp(m)
        assert res.objective == pytest.approx(1.0)
        assert res.values[0] == pytest.approx(0.5)

    def test_extra_bounds_tighten(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0, 1)
        m.set_objective([(x, 1.0)], "maximize")
        res = solve_lp(m, extra_bounds={0: (0.0, 0.25)})
        assert res.objective == pytest.approx(0.25)

    def test_empty_constraint_rows_dropped_or_infeasible(self):
        m = MilpInstance()
        m.add_variable("x", "continuous", 0, 1)
        m.add_constraint([], "<=", 1.0)  # vacuous
        m.set_objective([(0, 1.0)], "maximize")
        assert solve_lp(m).objective == pytest.approx(1.0)
        m2 = MilpInstance()
        m2.add_variable("x", "continuous", 0, 1)
        m2.add_constraint([], ">=", 2.0)  # 0 >= 2
        m2.set_objective([(0, 1.0)], "maximize")
        assert solve_lp(m2).status == "infeasible"

    def test_deterministic_repeat(self):
        m = MilpInstance()
        for j in range(4):
            m.add_variable(f"x{j}", "continuous", 0, 2)
        m.add_constraint([(0, 1.0), (1, 1.0), (2, 1.0)], "<=", 3.0)
        m.add_constraint([(1, 1.0), (3, -1.0)], ">=", 0.5)
        m.set_objective([(0, 1.0), (1, 2.0), (2, 0.5), (3, 1.0)], "maximize")
        r1, r2 = solve_lp(m), solve_lp(m)
        assert r1.values == r2.values and r1.objective == r2.objective

    def test_lpdata_reuse_matches_instance_solve(self):
        m = MilpInstance()
        for j in range(3):
            m.add_variable(f"x{j}", "continuous", 0, 1)
        m.add_constraint([(0, 1.0), (1, 1.0)], "<=", 1.2)
        m.set_objective([(0, 1.0), (1, 1.0), (2, 1.0)], "maximize")
        data = LpData(m)
        assert solve_lp(data).objective == solve_lp(m).objective


class TestRandomizedOracle:
    def test_two_hundred_random_lps_match_vertex_enumeration(self):
        rng = np.random.default_rng(20240817)
        solved = 0
        for _ in range(200):
            n = int(rng.integers(1, 6))
            mrows = int(rng.integers(0, 6))
            c = rng.integers(-5, 6, size=n).astype(float)
            A = rng.integers(-4, 5, size=(mrows, n)).astype(float)
            senses = [str(rng.choice(["<=", ">=", "="]))
                      for _ in range(mrows)]
            b = rng.integers(-6, 7, size=mrows).astype(float)
            lower = rng.integers(-3, 1, size=n).astype(float)
            upper = lower + rng.integers(1, 5, size=n).astype(float)
            maximize = bool(rng.integers(0, 2))

            want = lp_by_vertex_enumeration(c, A, senses, b, lower, upper, maximize)
            res = solve_lp(build(c, A, senses, b, lower, upper, maximize))
            if want is None:
                assert res.status == "infeasible"
            else:
                assert res.status == "optimal", (c, A, senses, b, lower, upper)
                assert res.objective == pytest.approx(want, abs=1e-6)
                solved += 1
        assert solved > 50  # the generator should not be degenerate

    def test_returned_points_feasible_and_objective_recomputes(self):
        rng = np.random.default_rng(99)
        for _ in range(60):
            n = int(rng.integers(2, 7))
            mrows = int(rng.integers(1, 7))
            c = rng.integers(-5, 6, size=n).astype(float)
            A = rng.integers(-4, 5, size=(mrows, n)).astype(float)
            senses = [str(rng.choice(["<=", ">="]))
                      for _ in range(mrows)]
            b = rng.integers(0, 9, size=mrows).astype(float)
            lower = np.zeros(n)
            upper = np.full(n, float(rng.integers(1, 4)))
            inst = build(c, A, senses, b, lower, upper, True)
            res = solve_lp(inst)
            if res.status != "optimal":
                continue
            assert residuals_ok(inst, res.values)
            recomputed = inst.objective_value(res.values)
            assert recomputed == pytest.approx(res.objective, abs=1e-7)
            for j, v in res.values.items():
                assert lower[j] - 1e-9 <= v <= upper[j] + 1e-9
