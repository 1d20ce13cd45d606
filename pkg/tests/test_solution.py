import pytest

from milp.model import MilpModel, Sense
from milp.solution import (
    SolveResult,
    SolveStatus,
    bind_solution,
    format_solution,
    fractional_binaries,
    parse_solution,
)
from milp.solution_cache import SolutionCache
from utilities.exceptions import SolutionViolationError, SolverError


@pytest.fixture
def model():
    model = MilpModel("bind")
    x = model.add_continuous("x", 0.0, 10.0)
    y = model.add_continuous("y", 2.0, 5.0)
    z = model.add_binary("z")
    model.add_constraint(x + y, Sense.LE, 12.0, "cap")
    model.add_conditional(z, 1, x, Sense.GE, 4.0, "on")
    return model


def test_solution_format():
    text = format_solution(SolveStatus.OPTIMAL, {"x": 0.1, "z": 1.0})
    assert text == "Optimal\nx 0.1\nz 1.0\n"
    assert parse_solution(text) == (SolveStatus.OPTIMAL, {"x": 0.1, "z": 1.0})
    assert parse_solution("\nInfeasible\n\n") == (SolveStatus.INFEASIBLE, {})


@pytest.mark.parametrize(
    "text, message",
    [("", "empty"), ("Solved\n", "unknown solution status"), ("Optimal\nx\n", "line 2"), ("Optimal\nx one\n", "value")],
)
def test_malformed_solutions(text, message):
    with pytest.raises(SolverError, match=message):
        parse_solution(text)


def test_bind_rounds_clamps_and_fills(model):
    values = bind_solution(model, {"x": 4.0000000001, "z": 0.9999999})
    assert values == {"x": pytest.approx(4.0), "y": 2.0, "z": 1.0}


def test_bind_rejects_non_integral_binaries(model):
    with pytest.raises(SolutionViolationError, match="non-integral") as info:
        bind_solution(model, {"x": 5.0, "y": 3.0, "z": 0.5})
    assert info.value.worst_constraint == "z"


def test_bind_rejects_out_of_bounds_values(model):
    with pytest.raises(SolutionViolationError, match="outside"):
        bind_solution(model, {"x": 11.0, "y": 3.0, "z": 0.0})


def test_bind_reports_the_worst_row(model):
    with pytest.raises(SolutionViolationError) as info:
        bind_solution(model, {"x": 9.0, "y": 5.0, "z": 0.0})
    assert info.value.worst_constraint == "cap"
    with pytest.raises(SolutionViolationError) as info:
        bind_solution(model, {"x": 1.0, "y": 3.0, "z": 1.0})
    assert info.value.worst_constraint == "on"


def test_guard_off_leaves_body_free(model):
    assert bind_solution(model, {"x": 1.0, "y": 3.0, "z": 0.0})["x"] == 1.0


def test_result_summary():
    result = SolveResult(SolveStatus.FEASIBLE, {"x": 1.0}, objective=2.5, runtime=1.23456789, adapter="cbc")
    assert result.to_dict() == {"status": "Feasible", "objective": 2.5, "runtime": 1.234568, "adapter": "cbc"}
    assert result.status.has_solution
    assert not SolveStatus.TIME_LIMIT.has_solution


def test_cache_keeps_only_final_statuses(tmp_path):
    lp = "\\ demo\nMinimize\n obj: 0 x\nSubject To\nBounds\nEnd\n"
    assert SolutionCache.get(lp, "cbc", tmp_path) is None
    assert not SolutionCache.set(lp, "cbc", SolveResult(SolveStatus.FEASIBLE, {"x": 1.0}), tmp_path)
    assert SolutionCache.set(lp, "cbc", SolveResult(SolveStatus.OPTIMAL, {"x": 1.0}), tmp_path)

    cached = SolutionCache.get(lp, "cbc", tmp_path)
    assert cached.status is SolveStatus.OPTIMAL
    assert cached.values == {"x": 1.0}
    assert cached.output.startswith("cached:")
    assert SolutionCache.get(lp, "highs", tmp_path) is None
    assert SolutionCache.get(lp + " ", "cbc", tmp_path) is None


def test_fractional_binaries(model):
    assert fractional_binaries(model, {"x": 0.3, "z": 1.0 - 1e-8}) == {}
    gaps = fractional_binaries(model, {"x": 0.3, "z": 1.2e-5})
    assert list(gaps) == ["z"]
    assert gaps["z"] == pytest.approx(1.2e-5)
