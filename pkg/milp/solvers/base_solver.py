import logging
import os
import subprocess
import time
from abc import ABC, abstractmethod
from pathlib import Path

from dotenv import load_dotenv

from milp.solution import SolveResult, SolveStatus
from utilities.exceptions import ConfigError, SolverError
from utilities.logging import setup_logging

# Extra wall-clock allowance on top of the solver's own time limit before the process is killed.
KILL_GRACE = 30.0


class SolverAdapter(ABC):
    """An external MILP solver driven through an LP file and a solution file."""

    name = "solver"

    def __init__(self, executable: str | None = None):
        self.executable = executable
        self.logger = setup_logging(type(self).__name__, logging.DEBUG)

    @abstractmethod
    def locate(self) -> str | None:
        """Path of the solver executable, or None when it is not installed."""

    @abstractmethod
    def command(self, exe: str, lp_path: Path, sol_path: Path, time_limit: float) -> list[str]:
        pass

    @abstractmethod
    def parse_output(self, sol_path: Path, stdout: str) -> SolveResult:
        pass

    def available(self) -> bool:
        return self.locate() is not None

    def run(self, lp_path: Path, sol_path: Path, time_limit: float) -> SolveResult:
        exe = self.locate()
        if exe is None:
            raise SolverError(f"{self.name} executable not found")
        cmd = self.command(exe, Path(lp_path), Path(sol_path), time_limit)
        self.logger.debug(f"Running {' '.join(cmd)}")
        start = time.perf_counter()
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=time_limit + KILL_GRACE)
        except subprocess.TimeoutExpired as e:
            runtime = time.perf_counter() - start
            self.logger.warning(f"{self.name} ignored its time limit and was killed after {runtime:.1f}s")
            output = e.stdout if isinstance(e.stdout, str) else ""
            return SolveResult(SolveStatus.TIME_LIMIT, output=output, runtime=runtime, adapter=self.name)
        except OSError as e:
            self.logger.error(f"Could not start {self.name}: {str(e)}", exc_info=True)
            raise SolverError(f"could not start {self.name}: {e}") from e
        runtime = time.perf_counter() - start
        output = proc.stdout + proc.stderr

        try:
            result = self.parse_output(Path(sol_path), proc.stdout)
        except SolverError as e:
            self.logger.error(f"{self.name} exited with {proc.returncode} and no readable solution: {str(e)}")
            return SolveResult(SolveStatus.ERROR, output=output, runtime=runtime, adapter=self.name)
        result.output = output
        result.runtime = runtime
        result.adapter = self.name
        self.logger.info(f"{self.name} finished in {runtime:.2f}s with status {result.status.value}")
        return result


class SolverFactory:
    @staticmethod
    def get_solver(name: str, **kwargs) -> SolverAdapter:
        if name == "cbc":
            from milp.solvers.cbc_solver import CbcSolver

            return CbcSolver(**kwargs)
        elif name == "highs":
            from milp.solvers.highs_solver import HighsSolver

            return HighsSolver(**kwargs)
        elif name.startswith("command:"):
            from milp.solvers.command_solver import CommandSolver

            return CommandSolver(template=name.removeprefix("command:"), **kwargs)
        else:
            raise ConfigError(f"Unknown solver: {name}")

    @staticmethod
    def default(name: str | None = None, **kwargs) -> SolverAdapter:
        """The named adapter, else STLTS_SOLVER, else the first of CBC and HiGHS that is installed."""
        load_dotenv()
        name = name or os.getenv("STLTS_SOLVER")
        if name:
            return SolverFactory.get_solver(name, **kwargs)
        for candidate in ("cbc", "highs"):
            solver = SolverFactory.get_solver(candidate, **kwargs)
            if solver.available():
                return solver
        raise SolverError("no MILP solver found; install CBC or HiGHS, or set STLTS_SOLVER")
