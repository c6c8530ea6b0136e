"""Branch-and-bound against exhaustive binary enumeration."""

import math
import random

import numpy as np
import pytest

from gridcover.milp import MilpInstance
from gridcover.bnb import MilpResult, SolveParams, solve_milp
from gridcover.simplex import FEAS_TOL, solve_lp

from oracles import milp_by_enumeration


def random_milp(rng: random.Random, n_bin=None, n_cont=None, n_rows=None) -> MilpInstance:
    n_bin = n_bin if n_bin is not None else rng.randint(2, 8)
    n_cont = n_cont if n_cont is not None else rng.randint(0, 2)
    n_rows = n_rows if n_rows is not None else rng.randint(1, 10)
    m = MilpInstance()
    for i in range(n_bin):
        m.add_variable(f"b{i}", "binary", 0, 1)
    for i in range(n_cont):
        m.add_variable(f"y{i}", "continuous", 0, rng.randint(1, 3))
    n = n_bin + n_cont
    for _ in range(n_rows):
        terms = [
            (j, rng.randint(-4, 4))
            for j in rng.sample(range(n), rng.randint(1, n))
        ]
        terms = [(j, c) for j, c in terms if c]
        if not terms:
            continue
        sense = rng.choices(["<=", ">=", "="], weights=[6, 3, 1])[0]
        rhs = rng.randint(0, 8) if sense == "<=" else rng.randint(-4, 3)
        m.add_constraint(terms, sense, rhs)
    m.set_objective(
        [(j, rng.randint(-5, 5)) for j in range(n)], rng.choice(["maximize", "minimize"])
    )
    return m


class TestBasics:
    def test_one_of_two(self):
        m = MilpInstance()
        a = m.add_variable("a", "binary", 0, 1)
        b = m.add_variable("b", "binary", 0, 1)
        m.add_constraint([(a, 1), (b, 1)], "<=", 1)
        m.set_objective([(a, 1), (b, 1)], "maximize")
        res = solve_milp(m)
        assert res.status == "optimal" and res.objective == pytest.approx(1.0)

    def test_infeasible(self):
        m = MilpInstance()
        x = m.add_variable("x", "binary", 0, 1)
        m.add_constraint([(x, 1)], ">=", 1)
        m.add_constraint([(x, 1)], "<=", 0)
        m.set_objective([(x, 1)], "maximize")
        assert solve_milp(m).status == "infeasible"

    def test_incumbent_binaries_exact_and_feasible(self):
        m = MilpInstance()
        vs = [m.add_variable(f"v{i}", "binary", 0, 1) for i in range(3)]
        m.add_constraint([(v, 2) for v in vs], "<=", 3)
        m.set_objective([(v, 1) for v in vs], "maximize")
        res = solve_milp(m)
        for v in vs:
            assert res.incumbent[v] in (0.0, 1.0)
        assert m.constraint_violation(res.incumbent) <= FEAS_TOL
        assert m.objective_value(res.incumbent) == pytest.approx(res.objective)

    def test_gap_definition(self):
        m = MilpInstance()
        x = m.add_variable("x", "binary", 0, 1)
        m.set_objective([(x, 5)], "maximize")
        res = solve_milp(m)
        assert res.status == "optimal"
        assert res.gap == pytest.approx(
            abs(res.objective - res.best_bound) / max(1, abs(res.objective))
        )
        assert res.gap <= 1e-9

    def test_pure_lp_instance(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0, 2.5)
        m.set_objective([(x, 2)], "maximize")
        res = solve_milp(m)
        assert res.status == "optimal" and res.objective == pytest.approx(5.0)


class TestWarmStart:
    def build(self):
        m = MilpInstance()
        vs = [m.add_variable(f"v{i}", "binary", 0, 1) for i in range(4)]
        m.add_constraint([(v, 1) for v in vs], "<=", 2)
        m.set_objective([(v, 1) for v in vs], "maximize")
        return m, vs

    def test_feasible_seed_does_not_change_optimum(self):
        m, vs = self.build()
        cold = solve_milp(m)
        warm = solve_milp(m, warm_start={vs[0]: 1.0, vs[1]: 0.0, vs[2]: 0.0, vs[3]: 0.0})
        assert cold.status == warm.status == "optimal"
        assert cold.objective == warm.objective == pytest.approx(2.0)

    def test_infeasible_seed_rejected(self):
        m, vs = self.build()
        with pytest.raises(ValueError, match="warm start"):
            solve_milp(m, warm_start={v: 1.0 for v in vs})

    def test_optimal_seed_short_circuits(self):
        # seed attains the bound implied by variable boxes: zero nodes needed
        m = MilpInstance()
        vs = [m.add_variable(f"v{i}", "binary", 0, 1) for i in range(3)]
        m.add_constraint([(v, 1) for v in vs], "<=", 3)
        m.set_objective([(v, 1) for v in vs], "maximize")
        res = solve_milp(m, warm_start={v: 1.0 for v in vs})
        assert res.status == "optimal" and res.nodes_explored == 0


class TestLimits:
    def harder_instance(self):
        rng = random.Random(424)
        return random_milp(rng, n_bin=12, n_cont=0, n_rows=10)

    def test_node_limit_reports_bound(self):
        m = self.harder_instance()
        res = solve_milp(m, SolveParams(node_limit=1))
        assert res.status in ("feasible", "no-incumbent", "optimal", "infeasible")
        assert res.nodes_explored <= 1

    def test_determinism_across_runs(self):
        m = self.harder_instance()
        a = solve_milp(m)
        b = solve_milp(m)
        assert a.nodes_explored == b.nodes_explored
        assert a.objective == b.objective
        assert a.incumbent == b.incumbent

    def test_depth_first_matches_best_bound_objective(self):
        m = self.harder_instance()
        bb = solve_milp(m, SolveParams(node_selection="best-bound"))
        df = solve_milp(m, SolveParams(node_selection="depth-first"))
        assert bb.status == df.status
        if bb.status == "optimal":
            assert bb.objective == pytest.approx(df.objective, abs=1e-6)


class TestOracleEquivalence:
    def test_fifty_random_milps(self):
        rng = random.Random(20240817)
        checked = 0
        feasible_count = 0
        while checked < 50:
            m = random_milp(rng)
            want_status, want = milp_by_enumeration(
                m, lp_solver=lambda inst, fixed: solve_lp(inst, fixed)
            )
            res = solve_milp(m)
            if want_status == "infeasible":
                assert res.status == "infeasible", (checked, res)
            else:
                feasible_count += 1
                assert res.status == "optimal", (checked, res)
                assert res.objective == pytest.approx(want, abs=1e-6), checked
            checked += 1
        assert feasible_count >= 20

    def test_anytime_bound_sound(self):
        rng = random.Random(7)
        for _ in range(8):
            m = random_milp(rng, n_bin=6, n_cont=0, n_rows=6)
            want_status, want = milp_by_enumeration(m)
            if want_status != "optimal":
                continue
            sense_max = m.objective_sense == "maximize"
            for limit in (1, 2, 4, 8):
                res = solve_milp(m, SolveParams(node_limit=limit))
                if res.best_bound is None:
                    continue
                if sense_max:
                    assert res.best_bound >= want - 1e-7
                else:
                    assert res.best_bound <= want + 1e-7

    def test_incumbents_always_verified(self):
        rng = random.Random(99)
        for _ in range(20):
            m = random_milp(rng)
            res = solve_milp(m)
            if res.incumbent is None:
                continue
            assert m.constraint_violation(res.incumbent) <= FEAS_TOL
            for vid, var in enumerate(m.variables):
                if var.kind == "binary":
                    assert res.incumbent[vid] in (0.0, 1.0)
