import shlex
import shutil
from pathlib import Path

from milp.solution import SolveResult, parse_solution
from milp.solvers.base_solver import SolverAdapter
from utilities.exceptions import ConfigError, SolverError


class CommandSolver(SolverAdapter):
    """Any command that reads `{lp}` and writes the normalized solution format to `{sol}`.

    Example: `command:my-solver --lp {lp} --out {sol} --seconds {time_limit}`.
    """

    name = "command"

    def __init__(self, template: str, executable: str | None = None):
        if "{lp}" not in template or "{sol}" not in template:
            raise ConfigError(f"solver command template needs {{lp}} and {{sol}}: '{template}'")
        super().__init__(executable)
        self.template = template

    def locate(self) -> str | None:
        program = self.executable or shlex.split(self.template)[0]
        return shutil.which(program) or (program if Path(program).exists() else None)

    def command(self, exe: str, lp_path: Path, sol_path: Path, time_limit: float) -> list[str]:
        words = shlex.split(self.template.format(lp=lp_path, sol=sol_path, time_limit=f"{time_limit:g}"))
        return [exe, *words[1:]]

    def parse_output(self, sol_path: Path, stdout: str) -> SolveResult:
        if not sol_path.exists():
            raise SolverError("solver command wrote no solution file", stdout)
        status, values = parse_solution(sol_path.read_text(encoding="utf-8"))
        return SolveResult(status, values if status.has_solution else {})
