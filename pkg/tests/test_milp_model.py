import math

import numpy as np
import pytest

from ces_market.milp import BINARY, MilpModel, ModelError, check_solution, new_model


class TestConstruction:
    def test_counts(self):
        m = new_model("min")
        x = m.add_variable(0, 1)
        y = m.add_variable(0, 2)
        m.add_constraint({x: 1.0, y: 1.0}, "<=", 1.5)
        assert (m.n_variables, m.n_constraints) == (2, 1)

    def test_unknown_variable_id_rejected(self):
        m = new_model("min")
        m.add_variable(0, 1)
        m.add_variable(0, 1)
        with pytest.raises(ModelError, match="out of range"):
            m.add_constraint({5: 1.0}, "<=", 1.0)

    def test_set_objective_last_write_wins(self):
        m = new_model("max")
        x = m.add_variable(0, 1)
        m.set_objective({x: 1.0})
        m.set_objective({x: 3.0})
        assert m.arrays().c[x] == 3.0

    def test_nan_coefficient_rejected(self):
        m = new_model("min")
        x = m.add_variable(0, 1)
        with pytest.raises(ModelError, match="finite"):
            m.add_constraint({x: float("nan")}, "<=", 1.0)
        with pytest.raises(ModelError, match="finite"):
            m.add_constraint({x: math.inf}, "<=", 1.0)
        with pytest.raises(ModelError, match="finite"):
            m.set_objective({x: float("nan")})

    def test_binary_bounds_must_fit_unit_box(self):
        m = new_model("min")
        with pytest.raises(ModelError, match="binary"):
            m.add_variable(0, 2, kind=BINARY)
        v = m.add_variable(1, 1, kind=BINARY)  # fixed binaries are fine
        assert m.arrays().binary[v]

    def test_bad_relation_and_sense(self):
        with pytest.raises(ModelError):
            MilpModel("maximize")
        m = new_model("min")
        x = m.add_variable(0, 1)
        with pytest.raises(ModelError):
            m.add_constraint({x: 1.0}, "<<", 1.0)

    def test_bound_order_checked(self):
        m = new_model("min")
        with pytest.raises(ModelError, match="lower bound"):
            m.add_variable(2, 1)


class TestLpExport:
    def test_writes_sections(self, tmp_path):
        m = new_model("max")
        x = m.add_variable(0, 1, kind=BINARY, name="pick")
        y = m.add_variable(0, 5, name="amount")
        m.add_constraint({x: 2.0, y: 1.0}, "<=", 4.0, name="cap")
        m.set_objective({x: 3.0, y: 1.0})
        path = tmp_path / "model.lp"
        m.write_lp(path)
        text = path.read_text()
        for token in ("Maximize", "Subject To", "Bounds", "Binary", "End", "pick", "cap"):
            assert token in text


class TestChecker:
    def test_flags_violations(self):
        m = new_model("min")
        x = m.add_variable(0, 1, kind=BINARY)
        y = m.add_variable(0, 5)
        m.add_constraint({x: 1.0, y: 1.0}, "<=", 1.0)
        assert check_solution(m, np.array([1.0, 0.0])) == []
        problems = check_solution(m, np.array([0.5, 6.0]))
        assert len(problems) == 3  # fractional binary, bound, row
