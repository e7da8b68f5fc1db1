import random
from fractions import Fraction

import pytest

from oracles import lp_oracle, random_box_system
from uniassign.ratlp import (
    InfeasibleError,
    LinearSystem,
    coordinate_range,
    functional_range,
    lp_solve,
    verify_infeasibility_certificate,
)

F = Fraction


def test_simple_maximization():
    s = LinearSystem()
    s.add_variable("x")
    s.add_constraint({"x": 1}, "<=", F(1, 2), tag="cap")
    out = lp_solve(s, objective=("max", {"x": 1}))
    assert out.status == "optimal"
    assert out.value == F(1, 2)
    assert out.witness["x"] == F(1, 2)


def test_contradictory_equalities_produce_certificate():
    s = LinearSystem()
    s.add_variable("x", nonneg=False)
    s.add_constraint({"x": 1}, "=", F(1, 3), tag="a")
    s.add_constraint({"x": 1}, "=", F(1, 4), tag="b")
    out = lp_solve(s)
    assert out.status == "infeasible"
    assert verify_infeasibility_certificate(s, out.certificate)
    tags = {e.tag for e in out.certificate}
    assert tags == {"a", "b"}


def test_unbounded_detection():
    s = LinearSystem()
    s.add_variable("x")
    s.add_constraint({"x": 1}, ">=", 0, tag="floor")
    out = lp_solve(s, objective=("max", {"x": 1}))
    assert out.status == "unbounded"


def test_free_variables_and_minimization():
    s = LinearSystem()
    s.add_variable("x", nonneg=False)
    s.add_constraint({"x": 1}, ">=", F(-5), tag="lo")
    s.add_constraint({"x": 1}, "<=", F(-2), tag="hi")
    assert lp_solve(s, objective=("min", {"x": 1})).value == F(-5)
    assert lp_solve(s, objective=("max", {"x": 1})).value == F(-2)


def test_undeclared_variable_rejected():
    s = LinearSystem()
    s.add_variable("x")
    with pytest.raises(ValueError):
        s.add_constraint({"y": 1}, "<=", 1)
    with pytest.raises(ValueError):
        lp_solve(s, objective=("max", {"y": 1}))


def _bistochastic(n: int) -> LinearSystem:
    s = LinearSystem()
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            s.add_variable(f"p[{i}][{j}]")
    for i in range(1, n + 1):
        s.add_constraint({f"p[{i}][{j}]": 1 for j in range(1, n + 1)}, "=", 1)
    for j in range(1, n + 1):
        s.add_constraint({f"p[{i}][{j}]": 1 for i in range(1, n + 1)}, "=", 1)
    return s


def test_forced_zero_on_the_bistochastic_polytope():
    # emptying column 2 for the first three agents forces p[4][2] = 1, which
    # leaves nothing of column 1 for agent 4
    s = _bistochastic(4)
    for i in (1, 2, 3):
        s.add_constraint({f"p[{i}][2]": 1}, "=", 0, tag=f"zero{i}")
    out = lp_solve(s, objective=("max", {"p[4][1]": 1}))
    assert out.status == "optimal"
    assert out.value == 0
    # same forcing pattern at 3x3, cross-checked against vertex enumeration
    s3 = _bistochastic(3)
    for i in (1, 2):
        s3.add_constraint({f"p[{i}][2]": 1}, "=", 0, tag=f"zero{i}")
    out3 = lp_solve(s3, objective=("max", {"p[3][1]": 1}))
    assert (out3.status, out3.value) == ("optimal", F(0))
    assert lp_oracle(s3, "max", {"p[3][1]": F(1)}) == ("optimal", F(0))


def test_coordinate_range_on_bistochastic_2x2():
    s = _bistochastic(2)
    assert coordinate_range(s, "p[1][1]") == (F(0), F(1))


def test_coordinate_range_propagates_certificates():
    s = LinearSystem()
    s.add_variable("x")
    s.add_constraint({"x": 1}, "<=", F(-1), tag="impossible")
    with pytest.raises(InfeasibleError) as err:
        coordinate_range(s, "x")
    assert verify_infeasibility_certificate(s, err.value.certificate)


def test_witness_satisfies_every_constraint_exactly(rng):
    for _ in range(30):
        s, obj = random_box_system(rng, rng.randint(1, 4))
        out = lp_solve(s, objective=obj)
        if out.status == "optimal":
            for con in s.constraints:
                assert con.satisfied_by(out.witness)
        elif out.status == "infeasible":
            assert verify_infeasibility_certificate(s, out.certificate)


def test_lp_matches_vertex_enumeration_small(rng):
    agreements = 0
    for _ in range(120):
        s, obj = random_box_system(rng, rng.randint(1, 4))
        out = lp_solve(s, objective=obj)
        status, value = lp_oracle(s, obj[0], obj[1])
        assert out.status == status
        if status == "optimal":
            assert out.value == value
            agreements += 1
    assert agreements > 30


def test_lp_matches_vertex_enumeration_medium(rng):
    # the up-to-eight-variable corpus runs in the acceptance suite
    for nvars in (5, 6):
        for _ in range(2):
            s, obj = random_box_system(rng, nvars, big=True)
            out = lp_solve(s, objective=obj)
            status, value = lp_oracle(s, obj[0], obj[1])
            assert out.status == status
            if status == "optimal":
                assert out.value == value


def test_degenerate_system_with_redundant_rows():
    s = LinearSystem()
    x = s.add_variable("x")
    y = s.add_variable("y")
    s.add_constraint({x: 1, y: 1}, "=", 1, tag="sum")
    s.add_constraint({x: 2, y: 2}, "=", 2, tag="sum-again")
    out = lp_solve(s, objective=("max", {x: 1}))
    assert out.status == "optimal"
    assert out.value == 1


def test_functional_range():
    s = _bistochastic(2)
    lo, hi = functional_range(s, {"p[1][1]": 1, "p[2][2]": 1})
    assert (lo, hi) == (F(0), F(2))
