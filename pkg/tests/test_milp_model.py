import math

import pytest

from milp.lowering import conditional_holds, expression_range, lower_conditional, lower_conditionals
from milp.lp_writer import write_lp, write_lp_file
from milp.model import LinExpr, MilpModel, ObjectiveSense, Sense
from utilities.exceptions import BigMError, EncodingError


@pytest.fixture
def model():
    model = MilpModel("demo")
    model.add_continuous("x", 0.0, 10.0)
    model.add_continuous("y", -5.0, math.inf)
    model.add_binary("z")
    return model


def test_linear_expressions(model):
    x, y, z = (model.var(name) for name in "xyz")
    expr = 2 * x - y + 3 - (z - 1) * 4
    assert expr.terms == {"x": 2.0, "y": -1.0, "z": -4.0}
    assert expr.const == 7.0
    assert expr.evaluate({"x": 1.0, "y": 2.0, "z": 1.0}) == 3.0
    assert LinExpr.sum([x, x, 1]).terms == {"x": 2.0}


def test_declarations_are_checked(model):
    with pytest.raises(EncodingError, match="declared twice"):
        model.add_binary("z")
    with pytest.raises(EncodingError, match="empty bounds"):
        model.add_continuous("w", 1.0, 0.0)
    with pytest.raises(EncodingError, match="not declared"):
        model.var("w")
    with pytest.raises(EncodingError, match="undeclared variable"):
        model.add_constraint(LinExpr({"w": 1.0}), Sense.LE, 1.0)
    with pytest.raises(EncodingError, match="outside"):
        model.fix("x", 11.0)
    assert model.fix("x", 4.0).is_fixed


def test_constant_rows(model):
    assert model.add_constraint(LinExpr(const=1.0), Sense.GE, 0.0) is None
    with pytest.raises(EncodingError, match="contradiction"):
        model.add_constraint(LinExpr(const=1.0), Sense.LE, 0.0, "bad")
    # a false body forbids the guard value
    model.add_conditional("z", 1, LinExpr(const=1.0), Sense.LE, 0.0, "never")
    (row,) = model.constraints
    assert (row.terms, row.sense, row.rhs) == ({"z": 1.0}, Sense.EQ, 0.0)


def test_names_are_unique(model):
    x = model.var("x")
    first = model.add_constraint(x, Sense.GE, 1.0, "row")
    second = model.add_constraint(x, Sense.LE, 9.0, "row")
    assert (first.name, second.name) == ("row", "row_1")


def test_equality_conditionals_split(model):
    model.add_conditional("z", 1, model.var("x"), Sense.EQ, 2.0, "pin")
    assert [c.name for c in model.conditionals] == ["pin_le", "pin_ge"]
    with pytest.raises(EncodingError, match="must be binary"):
        model.add_conditional("x", 1, model.var("x"), Sense.LE, 1.0)


def test_boolean_gadgets(model):
    a, b = model.add_binary("a"), model.add_binary("b")
    conj, disj, neg = model.add_binary("c"), model.add_binary("d"), model.add_binary("n")
    model.add_and(conj, [a, b], "and")
    model.add_or(disj, [a, b], "or")
    model.add_not(neg, a, "not")
    for va in (0, 1):
        for vb in (0, 1):
            values = {"x": 0.0, "y": 0.0, "z": 0.0, "a": va, "b": vb, "c": va & vb, "d": va | vb, "n": 1 - va}
            assert all(row.violation(values) == 0 for row in model.constraints)
            wrong = dict(values, c=1 - (va & vb))
            assert any(row.violation(wrong) > 0 for row in model.constraints)


def test_big_m_rows(model):
    x = model.var("x")
    model.add_conditional("z", 1, x, Sense.GE, 4.0, "on")
    model.add_conditional("z", 0, x, Sense.LE, 3.0, "off")
    model.add_conditional("z", 1, x, Sense.LE, 20.0, "slack")
    on, off, slack = model.conditionals

    row = lower_conditional(on, model.vars)
    assert (row.terms, row.sense, row.rhs) == ({"x": 1.0, "z": -4.0}, Sense.GE, 0.0)
    row = lower_conditional(off, model.vars)
    assert (row.terms, row.sense, row.rhs) == ({"x": 1.0, "z": -7.0}, Sense.LE, 3.0)
    assert lower_conditional(slack, model.vars) is None

    lowered = lower_conditionals(model)
    assert not lowered.conditionals
    assert [c.name for c in lowered.constraints] == ["on", "off"]
    assert len(model.conditionals) == 3

    with pytest.raises(BigMError, match="above the cap"):
        lower_conditional(off, model.vars, m_max=5.0)


def test_lowered_rows_match_the_implication(model):
    x = model.var("x")
    model.add_conditional("z", 0, x, Sense.GE, 6.0, "low")
    (cond,) = model.conditionals
    row = lower_conditional(cond, model.vars)
    for z in (0, 1):
        for value in (0.0, 5.0, 6.0, 10.0):
            values = {"x": value, "z": z}
            assert (row.violation(values) == 0) == conditional_holds(cond, values)


def test_unbounded_variables_cannot_be_guarded(model):
    model.add_conditional("z", 1, model.var("y"), Sense.LE, 0.0, "y_cap")
    with pytest.raises(BigMError, match="no finite bounds"):
        lower_conditionals(model)
    with pytest.raises(BigMError):
        expression_range({"y": 1.0}, model.vars)


def test_lp_text(model, tmp_path):
    x, y, z = (model.var(name) for name in "xyz")
    model.add_continuous("u", 0.0, 1.0)
    model.add_constraint(x + 2 * y, Sense.LE, 8.0, "c1")
    model.add_constraint(z - x, Sense.GE, -1.5, "c2")
    model.set_objective(ObjectiveSense.MAXIMIZE, x - 3 * z)
    expected = "\n".join(
        [
            "\\ demo",
            "Maximize",
            " obj: x - 3 z + 0 u",
            "Subject To",
            " c1: x + 2 y <= 8",
            " c2: z - x >= -1.5",
            "Bounds",
            " 0 <= x <= 10",
            " y >= -5",
            " 0 <= u <= 1",
            "Binaries",
            " z",
            "End",
            "",
        ]
    )
    assert write_lp(model) == expected
    path = write_lp_file(model, tmp_path / "demo.lp")
    assert path.read_text(encoding="utf-8") == expected


def test_lp_text_for_feasibility_and_fixed_binaries(model):
    model.fix("z", 1.0)
    model.add_constraint(model.var("x") + model.var("y") + model.var("z"), Sense.EQ, 2.0, "sum")
    text = write_lp(model)
    assert " obj: 0 x" in text
    assert " sum: x + y + z = 2" in text
    assert " z = 1" in text


def test_lp_writer_needs_lowered_models(model):
    model.add_conditional("z", 1, model.var("x"), Sense.GE, 1.0)
    with pytest.raises(EncodingError, match="lower conditional"):
        write_lp(model)


def test_long_rows_wrap():
    model = MilpModel("wide")
    terms = LinExpr.sum(model.add_binary(f"b{k}") for k in range(20))
    model.add_constraint(terms, Sense.LE, 3.0, "wide")
    row = write_lp(model).split("Subject To\n")[1].split("Bounds")[0]
    assert row.count("\n") == 3
