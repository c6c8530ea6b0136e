"""MILP container, statistics, LP-format export, solution parsing."""

import math
import random

import pytest

from gridcover.formulations import build_milp_cov, build_milp_mov, build_milp_static
from gridcover.grid import GridSpec
from gridcover.milp import (
    MilpInstance,
    instance_stats,
    parse_solution_values,
    write_lp_text,
)

from lp_reader import read_lp_text, solve_parsed


class TestAddVariable:
    def test_ids_are_dense(self):
        m = MilpInstance()
        assert m.add_variable("x_s1_2_3", "binary", 0, 1) == 0
        assert m.add_variable("c_2_3", "continuous", 0, 1) == 1

    def test_duplicate_name_rejected(self):
        m = MilpInstance()
        m.add_variable("x", "binary", 0, 1)
        with pytest.raises(ValueError, match="duplicate"):
            m.add_variable("x", "continuous", 0, 1)

    def test_inverted_bounds_rejected(self):
        m = MilpInstance()
        with pytest.raises(ValueError, match="bounds"):
            m.add_variable("x", "continuous", 2, 1)

    def test_binary_bounds_inside_unit_box(self):
        m = MilpInstance()
        with pytest.raises(ValueError):
            m.add_variable("x", "binary", 0, 2)

    def test_bad_names_rejected(self):
        m = MilpInstance()
        for bad in ("", "2x", "a b"):
            with pytest.raises(ValueError):
                m.add_variable(bad, "binary", 0, 1)


class TestAddConstraint:
    def test_insertion_order_ids(self):
        m = MilpInstance()
        x0 = m.add_variable("x0", "binary", 0, 1)
        x1 = m.add_variable("x1", "binary", 0, 1)
        assert m.add_constraint([(x0, 1), (x1, 1)], "=", 1) == 0
        assert m.add_constraint([(x0, 1)], "<=", 1) == 1

    def test_unknown_variable_rejected(self):
        m = MilpInstance()
        m.add_variable("x", "binary", 0, 1)
        foreign = MilpInstance()
        for _ in range(5):
            foreign.add_variable(f"y{_}", "binary", 0, 1)
        with pytest.raises(ValueError, match="unknown variable id"):
            m.add_constraint([(4, 1.0)], "<=", 1)

    def test_duplicate_term_rejected(self):
        m = MilpInstance()
        x = m.add_variable("x", "binary", 0, 1)
        with pytest.raises(ValueError, match="duplicate"):
            m.add_constraint([(x, 1), (x, 2)], "<=", 1)

    def test_nonfinite_coefficient_rejected(self):
        m = MilpInstance()
        x = m.add_variable("x", "binary", 0, 1)
        with pytest.raises(ValueError, match="finite"):
            m.add_constraint([(x, math.inf)], "<=", 1)


class TestInstanceStats:
    def test_static_formula(self):
        # N_s + (N_s + 1)|C| rows: position block, linking block, cap block
        g = GridSpec(10, 10)
        s = instance_stats(build_milp_static(g, 5).instance)
        assert (s.n_binary, s.n_continuous, s.n_constraints) == (500, 500, 605)

    def test_cov_formula(self):
        g = GridSpec(10, 10)
        s = instance_stats(build_milp_cov(g, sorted(g.cells()), 3, 4).instance)
        assert (s.n_binary, s.n_continuous, s.n_constraints) == (1200, 1300, 3512)

    def test_mov_is_cov_plus_one(self):
        g = GridSpec(10, 10)
        cov = instance_stats(build_milp_cov(g, sorted(g.cells()), 3, 4).instance)
        mov = instance_stats(
            build_milp_mov(g, sorted(g.cells()), 0, 3, 4, coverage_target=1).instance
        )
        assert mov.n_constraints == cov.n_constraints + 1
        assert (mov.n_binary, mov.n_continuous) == (cov.n_binary, cov.n_continuous)

    def test_matches_direct_recount_on_random_instances(self):
        rng = random.Random(7)
        for _ in range(25):
            m = MilpInstance()
            kinds = []
            for i in range(rng.randrange(1, 30)):
                kind = rng.choice(["binary", "continuous"])
                kinds.append(kind)
                m.add_variable(f"v{i}", kind, 0, 1)
            for _ in range(rng.randrange(0, 20)):
                vid = rng.randrange(len(kinds))
                m.add_constraint([(vid, rng.uniform(-3, 3))], rng.choice(["<=", "=", ">="]), 1.0)
            s = instance_stats(m)
            assert s.n_binary == sum(1 for k in kinds if k == "binary")
            assert s.n_continuous == len(kinds) - s.n_binary
            assert s.n_constraints == len(m.constraints)


def tiny_instance():
    m = MilpInstance()
    x = m.add_variable("x", "binary", 0, 1)
    m.add_constraint([(x, 1.0)], "<=", 1.0)
    m.set_objective([(x, 1.0)], "maximize")
    return m


class TestWriteLpText:
    def test_sections_present(self):
        text = write_lp_text(tiny_instance())
        assert text.startswith("Maximize\n")
        assert " c1: 1 x <= 1" in text
        assert "Binary\n x\n" in text
        assert text.endswith("End\n")

    def test_empty_objective_placeholder(self):
        m = MilpInstance()
        m.add_variable("x", "continuous", 0, 1)
        text = write_lp_text(m)
        assert " obj: 0" in text

    def test_deterministic_bytes(self):
        a = write_lp_text(tiny_instance())
        b = write_lp_text(tiny_instance())
        assert a == b

    def test_roundtrip_through_independent_reader(self):
        m = MilpInstance()
        x = m.add_variable("x", "continuous", 0, 10)
        y = m.add_variable("y", "continuous", -math.inf, math.inf)
        z = m.add_variable("z", "binary", 0, 1)
        m.add_constraint([(x, 1.5), (y, -2.0)], "<=", 4.0)
        m.add_constraint([(y, 1.0), (z, 3.0)], ">=", -1.0)
        m.add_constraint([(x, 1.0)], "=", 2.0)
        m.set_objective([(x, 3.0), (z, -1.25)], "maximize")
        parsed = read_lp_text(write_lp_text(m))
        assert parsed.maximize
        assert parsed.objective == {"x": 3.0, "z": -1.25}
        assert parsed.constraints[0] == ({"x": 1.5, "y": -2.0}, "<=", 4.0)
        assert parsed.constraints[1] == ({"y": 1.0, "z": 3.0}, ">=", -1.0)
        assert parsed.constraints[2] == ({"x": 1.0}, "=", 2.0)
        assert parsed.lower == {"x": 0.0, "y": -math.inf, "z": 0.0}
        assert parsed.upper == {"x": 10.0, "y": math.inf, "z": 1.0}
        assert parsed.binaries == ["z"]

    def test_static_3x3_file_solves_to_33_externally(self):
        handle = build_milp_static(GridSpec(3, 3), 1, 1, 1, 4.0)
        parsed = read_lp_text(write_lp_text(handle.instance))
        status, objective = solve_parsed(parsed, as_milp=True)
        assert status == 0
        assert objective == pytest.approx(33.0, abs=1e-6)

    def test_cov_export_declares_all_binaries(self):
        g = GridSpec(10, 10)
        handle = build_milp_cov(g, sorted(g.cells()), 3, 4)
        text = write_lp_text(handle.instance)
        binary_section = text.split("Binary\n", 1)[1].split("End", 1)[0]
        assert len(binary_section.split()) == 1200


class TestParseSolutionValues:
    def test_single_value(self):
        m = tiny_instance()
        assert parse_solution_values("x 1\n", m) == {0: 1.0}

    def test_empty_text_defaults_to_zero(self):
        m = tiny_instance()
        assert parse_solution_values("", m) == {0: 0.0}

    def test_unknown_name_rejected(self):
        with pytest.raises(ValueError, match="unknown variable"):
            parse_solution_values("y 0.5", tiny_instance())

    def test_unparseable_value_rejected(self):
        with pytest.raises(ValueError, match="unparseable"):
            parse_solution_values("x abc", tiny_instance())
