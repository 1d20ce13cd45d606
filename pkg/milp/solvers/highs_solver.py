import re
import shutil
from pathlib import Path

from milp.solution import SolveResult, SolveStatus
from milp.solvers.base_solver import SolverAdapter
from utilities.exceptions import SolverError

_STDOUT_STATUS = re.compile(r"Model\s+status\s*:\s*(.+)")


def _status_from_text(model_status: str, has_values: bool) -> SolveStatus:
    text = model_status.strip().lower()
    if text == "optimal":
        return SolveStatus.OPTIMAL
    if "infeasible" in text:
        return SolveStatus.INFEASIBLE
    if "time limit" in text or "interrupt" in text or "iteration limit" in text:
        return SolveStatus.FEASIBLE if has_values else SolveStatus.TIME_LIMIT
    return SolveStatus.ERROR


def parse_highs_solution(text: str) -> tuple[str, dict[str, float]]:
    """Model status and primal column values from a HiGHS raw solution file."""
    lines = [line.strip() for line in text.splitlines()]
    model_status = ""
    values: dict[str, float] = {}
    index = 0
    while index < len(lines):
        line = lines[index]
        if line == "Model status" and index + 1 < len(lines):
            model_status = lines[index + 1]
            index += 2
            continue
        if line == "# Primal solution values":
            feasible = index + 1 < len(lines) and lines[index + 1] == "Feasible"
            index += 2
            if not feasible:
                continue
            while index < len(lines) and not lines[index].startswith("# Columns"):
                index += 1
            if index == len(lines):
                raise SolverError("HiGHS solution file has no column block", text)
            count = int(lines[index].split()[2])
            for line in lines[index + 1 : index + 1 + count]:
                parts = line.split()
                if len(parts) != 2:
                    raise SolverError(f"malformed HiGHS value line '{line}'", text)
                values[parts[0]] = float(parts[1])
            index += count + 1
            continue
        index += 1
    return model_status, values


class HighsSolver(SolverAdapter):
    name = "highs"

    def locate(self) -> str | None:
        return shutil.which(self.executable or "highs")

    def command(self, exe: str, lp_path: Path, sol_path: Path, time_limit: float) -> list[str]:
        return [
            exe,
            "--model_file",
            str(lp_path),
            "--time_limit",
            f"{time_limit:g}",
            "--solution_file",
            str(sol_path),
        ]

    def parse_output(self, sol_path: Path, stdout: str) -> SolveResult:
        model_status, values = "", {}
        if sol_path.exists():
            model_status, values = parse_highs_solution(sol_path.read_text(encoding="utf-8"))
        if not model_status:
            match = _STDOUT_STATUS.search(stdout)
            if match is None:
                raise SolverError("HiGHS reported no model status", stdout)
            model_status = match.group(1)
        status = _status_from_text(model_status, bool(values))
        if not status.has_solution:
            values = {}
        return SolveResult(status, values)
