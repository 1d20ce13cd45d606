import logging
import tempfile
from pathlib import Path

from milp.lowering import lower_conditionals
from milp.lp_writer import write_lp
from milp.model import MilpModel
from milp.solution import SolveResult, fractional_binaries
from milp.solution_cache import SolutionCache
from milp.solvers.base_solver import SolverAdapter, SolverFactory
from utilities.config import DEFAULT_M_MAX, SolverConfig

logger = logging.getLogger(__name__)


def _run(solver: SolverAdapter, lp_text: str, directory: Path, stem: str, time_limit: float) -> SolveResult:
    lp_path = directory / f"{stem}.lp"
    sol_path = directory / f"{stem}.sol"
    lp_path.write_text(lp_text, encoding="utf-8")
    if sol_path.exists():
        sol_path.unlink()
    logger.debug(f"LP file written to {lp_path}")
    return solver.run(lp_path, sol_path, time_limit)


def solve(
    model: MilpModel,
    config: SolverConfig | None = None,
    m_max: float = DEFAULT_M_MAX,
    solver: SolverAdapter | None = None,
) -> SolveResult:
    """Lower, write and solve `model` with an external solver.

    On a time limit the solver's incumbent, if any, comes back as Feasible.
    """
    config = config or SolverConfig()
    solver = solver or SolverFactory.default(config.adapter, executable=config.executable)
    lp_text = write_lp(lower_conditionals(model, m_max))

    if config.use_cache:
        cached = SolutionCache.get(lp_text, solver.name, config.cache_dir)
        if cached is not None:
            logger.info(f"Using cached {cached.status.value} result for {model.name}")
            cached.objective = _objective(model, cached)
            return cached

    result = _solve_text(solver, lp_text, config, model.name)
    if result.status.has_solution:
        result = _fix_binaries(model, result, config, m_max, solver)

    result.objective = _objective(model, result)
    if config.use_cache:
        SolutionCache.set(lp_text, solver.name, result, config.cache_dir)
    return result


def _solve_text(solver: SolverAdapter, lp_text: str, config: SolverConfig, stem: str) -> SolveResult:
    if config.keep_files:
        directory = Path(config.work_dir or ".")
        directory.mkdir(parents=True, exist_ok=True)
        return _run(solver, lp_text, directory, stem, config.time_limit)
    with tempfile.TemporaryDirectory(prefix="stlts_") as tmp:
        return _run(solver, lp_text, Path(tmp), stem, config.time_limit)


def _fix_binaries(
    model: MilpModel, result: SolveResult, config: SolverConfig, m_max: float, solver: SolverAdapter
) -> SolveResult:
    """Re-solve with every binary fixed at its rounded value when the solver left some off integrality.

    The continuous part is then consistent with integral binaries. The original result is kept when the
    fixed model has no solution.
    """
    fractional = fractional_binaries(model, result.values)
    if not fractional:
        return result
    worst = max(fractional, key=fractional.get)
    logger.warning(
        f"{len(fractional)} binaries of {model.name} are off integrality (worst '{worst}' by {fractional[worst]:.2g}); "
        "re-solving with binaries fixed"
    )
    fixed = model.copy()
    fixed.name = f"{model.name}_fixed"
    for name, var in model.vars.items():
        if var.is_binary and name in result.values:
            fixed.fix(name, float(min(max(round(result.values[name]), 0), 1)))
    polished = _solve_text(solver, write_lp(lower_conditionals(fixed, m_max)), config, fixed.name)
    if not polished.status.has_solution:
        logger.warning(f"Fixed-binary model of {model.name} is {polished.status.value}; keeping the solver's values")
        return result
    result.values = polished.values
    result.runtime += polished.runtime
    return result


def _objective(model: MilpModel, result: SolveResult) -> float | None:
    if not result.status.has_solution:
        return None
    objective = model.objective
    return objective.const + sum(coeff * result.values.get(name, 0.0) for name, coeff in objective.terms.items())
