import os
import stat
from pathlib import Path

import pytest

from milp.model import MilpModel, ObjectiveSense, Sense
from milp.solution import SolveStatus
from milp.solve import solve
from milp.solvers.base_solver import SolverFactory
from milp.solvers.cbc_solver import CbcSolver, parse_cbc_solution
from milp.solvers.command_solver import CommandSolver
from milp.solvers.highs_solver import HighsSolver, parse_highs_solution
from utilities.config import SolverConfig
from utilities.exceptions import ConfigError, SolverError

CBC_OPTIMAL = """Optimal - objective value 4.00000000
      0 x                      4                       0
      1 z                      1                      -1
"""

CBC_STOPPED = """Stopped on time - objective value 2.00000000
      0 x                      2                       0
**    1 z                      1                       0
"""

HIGHS_OPTIMAL = """Model status
Optimal

# Primal solution values
Feasible
Objective 4
# Columns 2
x 4
z 1
# Rows 1
cap 4

# Dual solution values
None
"""


def test_cbc_solution_files():
    assert parse_cbc_solution(CBC_OPTIMAL) == (SolveStatus.OPTIMAL, {"x": 4.0, "z": 1.0})
    assert parse_cbc_solution(CBC_STOPPED) == (SolveStatus.FEASIBLE, {"x": 2.0, "z": 1.0})
    assert parse_cbc_solution("Infeasible - objective value 0.00000000\n") == (SolveStatus.INFEASIBLE, {})
    assert parse_cbc_solution("Integer infeasible - objective value 0\n")[0] is SolveStatus.INFEASIBLE
    stopped = "Stopped on time (no integer solution - continuous used) - objective value 1.5\n      0 x  1.5  0\n"
    assert parse_cbc_solution(stopped) == (SolveStatus.TIME_LIMIT, {})
    with pytest.raises(SolverError):
        parse_cbc_solution("")
    with pytest.raises(SolverError, match="unrecognised"):
        parse_cbc_solution("Unbounded - objective value 0\n")


def test_cbc_command():
    cmd = CbcSolver().command("/opt/cbc", Path("m.lp"), Path("m.sol"), 30.0)
    assert cmd[:4] == ["/opt/cbc", "m.lp", "-integerT", "1e-06"]
    assert cmd[4:] == ["-sec", "30", "-solve", "-printingOptions", "all", "-solu", "m.sol"]


def test_highs_solution_files(tmp_path):
    assert parse_highs_solution(HIGHS_OPTIMAL) == ("Optimal", {"x": 4.0, "z": 1.0})

    solver = HighsSolver()
    sol = tmp_path / "m.sol"
    sol.write_text(HIGHS_OPTIMAL)
    result = solver.parse_output(sol, "")
    assert result.status is SolveStatus.OPTIMAL
    assert result.values == {"x": 4.0, "z": 1.0}

    missing = tmp_path / "none.sol"
    assert solver.parse_output(missing, "Model   status      : Infeasible\n").status is SolveStatus.INFEASIBLE
    assert solver.parse_output(missing, "Model   status      : Time limit reached\n").status is SolveStatus.TIME_LIMIT
    with pytest.raises(SolverError, match="no model status"):
        solver.parse_output(missing, "")


def test_command_template():
    solver = CommandSolver("mysolver --lp {lp} --out {sol} -t {time_limit}")
    cmd = solver.command("/usr/bin/mysolver", Path("a.lp"), Path("a.sol"), 30.0)
    assert cmd == ["/usr/bin/mysolver", "--lp", "a.lp", "--out", "a.sol", "-t", "30"]
    with pytest.raises(ConfigError, match="needs"):
        CommandSolver("mysolver {lp}")


def test_factory():
    assert isinstance(SolverFactory.get_solver("cbc"), CbcSolver)
    assert isinstance(SolverFactory.get_solver("highs"), HighsSolver)
    command = SolverFactory.get_solver("command:run {lp} {sol}")
    assert isinstance(command, CommandSolver)
    assert command.template == "run {lp} {sol}"
    with pytest.raises(ConfigError, match="Unknown solver: gurobi"):
        SolverFactory.get_solver("gurobi")


def test_missing_executable(tmp_path):
    solver = CbcSolver(executable=str(tmp_path / "no-such-cbc"))
    assert not solver.available()
    with pytest.raises(SolverError, match="not found"):
        solver.run(tmp_path / "m.lp", tmp_path / "m.sol", 1.0)


@pytest.fixture
def fake_solver(tmp_path):
    """A shell script that counts its runs and reports x = 4, z = 1."""
    counter = tmp_path / "runs.txt"
    script = tmp_path / "fake-solver.sh"
    script.write_text(f"#!/bin/sh\necho run >> '{counter}'\nprintf 'Optimal\\nx 4\\nz 1\\n' > \"$2\"\n")
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    return CommandSolver(f"{script} {{lp}} {{sol}}"), counter


@pytest.fixture
def tiny():
    model = MilpModel("tiny")
    x = model.add_continuous("x", 0.0, 10.0)
    z = model.add_binary("z")
    model.add_conditional(z, 1, x, Sense.GE, 4.0, "on")
    model.set_objective(ObjectiveSense.MAXIMIZE, x + z)
    return model


@pytest.mark.skipif(os.name == "nt", reason="needs a POSIX shell")
def test_solve_through_an_external_command(tmp_path, fake_solver, tiny):
    solver, counter = fake_solver
    work = tmp_path / "work"
    result = solve(tiny, SolverConfig(keep_files=True, work_dir=work), solver=solver)
    assert result.status is SolveStatus.OPTIMAL
    assert result.values == {"x": 4.0, "z": 1.0}
    assert result.objective == 5.0
    assert result.adapter == "command"
    lp = (work / "tiny.lp").read_text()
    assert " on: x - 4 z >= 0" in lp
    assert (work / "tiny.sol").exists()


@pytest.mark.skipif(os.name == "nt", reason="needs a POSIX shell")
def test_solution_cache_skips_the_solver(tmp_path, fake_solver, tiny):
    solver, counter = fake_solver
    config = SolverConfig(use_cache=True, cache_dir=tmp_path / "cache")
    first = solve(tiny, config, solver=solver)
    second = solve(tiny, config, solver=solver)
    assert counter.read_text().split() == ["run"]
    assert second.values == first.values
    assert second.objective == 5.0
    assert second.output.startswith("cached:")


@pytest.mark.skipif(os.name == "nt", reason="needs a POSIX shell")
def test_fractional_binaries_are_fixed_and_resolved(tmp_path, tiny):
    """The first run leaves z slightly off 1; the run with z fixed returns integral values."""
    counter = tmp_path / "runs.txt"
    script = tmp_path / "sloppy-solver.sh"
    script.write_text(
        f"#!/bin/sh\necho run >> '{counter}'\n"
        "if grep -q ' z = 1' \"$1\"; then printf 'Optimal\\nx 4.5\\nz 1\\n' > \"$2\"; "
        "else printf 'Optimal\\nx 4\\nz 0.99998\\n' > \"$2\"; fi\n"
    )
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    result = solve(tiny, SolverConfig(), solver=CommandSolver(f"{script} {{lp}} {{sol}}"))
    assert counter.read_text().split() == ["run", "run"]
    assert result.status is SolveStatus.OPTIMAL
    assert result.values == {"x": 4.5, "z": 1.0}
    assert result.objective == 5.5
