import shutil
from pathlib import Path

import pulp

from milp.solution import INTEGRALITY_TOLERANCE, SolveResult, SolveStatus
from milp.solvers.base_solver import SolverAdapter
from utilities.exceptions import SolverError


def parse_cbc_solution(text: str) -> tuple[SolveStatus, dict[str, float]]:
    """Status and values from a file written by `cbc ... -solu`.

    Value lines are `index name value reduced-cost`, prefixed with `**` when the value is infeasible.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise SolverError("empty CBC solution file")
    header = lines[0].strip()
    first = header.split()[0]
    if first == "Optimal":
        status = SolveStatus.OPTIMAL
    elif first in ("Infeasible", "Integer"):
        status = SolveStatus.INFEASIBLE
    elif first == "Stopped":
        status = SolveStatus.TIME_LIMIT if "no integer solution" in header else SolveStatus.FEASIBLE
    else:
        raise SolverError(f"unrecognised CBC status line '{header}'", text)

    values = {}
    if status.has_solution:
        for line in lines[1:]:
            parts = line.split()
            if parts and parts[0] == "**":
                parts = parts[1:]
            if len(parts) < 3:
                continue
            try:
                values[parts[1]] = float(parts[2])
            except ValueError:
                raise SolverError(f"malformed CBC value line '{line}'", text) from None
    return status, values


class CbcSolver(SolverAdapter):
    name = "cbc"

    def locate(self) -> str | None:
        if self.executable:
            return shutil.which(self.executable) or (self.executable if Path(self.executable).exists() else None)
        exe = shutil.which("cbc")
        if exe:
            return exe
        # pulp ships a CBC binary for the common platforms
        bundled = pulp.PULP_CBC_CMD(msg=False)
        if bundled.available():
            return bundled.path
        return None

    def command(self, exe: str, lp_path: Path, sol_path: Path, time_limit: float) -> list[str]:
        return [
            exe,
            str(lp_path),
            "-integerT",
            f"{INTEGRALITY_TOLERANCE:g}",
            "-sec",
            f"{time_limit:g}",
            "-solve",
            "-printingOptions",
            "all",
            "-solu",
            str(sol_path),
        ]

    def parse_output(self, sol_path: Path, stdout: str) -> SolveResult:
        if not sol_path.exists():
            raise SolverError("CBC wrote no solution file", stdout)
        status, values = parse_cbc_solution(sol_path.read_text(encoding="utf-8"))
        return SolveResult(status, values)
