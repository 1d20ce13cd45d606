"""Trace synthesis with an incrementing N, bounded model checking as its dual, and parameter mining."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

from encoding.context import EncodingContext, VariableRegistry
from encoding.stl_encoder import encode_formula
from formula.ast import Formula, magnitude_parameters, timing_parameters
from formula.transforms import instantiate, negate, normalize
from milp.model import ObjectiveSense
from milp.solution import SolveResult, SolveStatus, bind_solution
from milp.solve import solve
from milp.solvers.base_solver import SolverAdapter, SolverFactory
from models.base_model import SystemModel
from monitor.boolean import sat
from monitor.robustness import robustness
from monitor.valuation import valuation_violations
from signals.trace import PwlTrace
from synthesis.outcomes import (
    CheckOutcome,
    CheckVerdict,
    MiningOutcome,
    NAttempt,
    OutcomeStatus,
    SynthesisOutcome,
    ValidationReport,
)
from utilities.config import EncodingConfig, SolverConfig
from utilities.exceptions import EncodingError, MonitorValidationError, ParameterDomainError, SolverError
from utilities.logging import setup_logging

# Relative tolerance used when monitoring solver-produced traces.
VALIDATION_TOLERANCE = 1e-6


def decode_trace(values: Mapping[str, float], registry: VariableRegistry) -> tuple[PwlTrace, list[float], dict]:
    """ς^pwl, Γ and Θ from a checked assignment."""
    gamma = [values[var.name] for var in registry.gamma]
    names = list(registry.states)
    states = [{v: values[registry.states[v][i].name] for v in names} for i in range(len(gamma))]
    theta = {psi: [values[var.name] > 0.5 for var in column] for psi, column in registry.theta.items()}
    return PwlTrace.from_points(gamma, states), gamma, theta


def validation_tolerance(trace: PwlTrace) -> float:
    largest = max((abs(float(x)) for v in trace.variables for x in trace.knot_values(v)), default=0.0)
    return VALIDATION_TOLERANCE * max(1.0, largest)


@dataclass
class _Attempt:
    record: NAttempt
    ctx: EncodingContext | None = None
    result: SolveResult | None = None

    @property
    def has_solution(self) -> bool:
        return self.result is not None and self.result.status.has_solution


class TraceSynthesizer:
    def __init__(
        self,
        encoding_config: EncodingConfig | None = None,
        solver_config: SolverConfig | None = None,
        solver: SolverAdapter | None = None,
    ):
        self.encoding_config = (encoding_config or EncodingConfig()).validate()
        self.solver_config = solver_config or SolverConfig()
        self._solver = solver
        self.logger = setup_logging("TraceSynthesizer", logging.DEBUG)

    @property
    def solver(self) -> SolverAdapter:
        if self._solver is None:
            self._solver = SolverFactory.default(self.solver_config.adapter, executable=self.solver_config.executable)
        return self._solver

    def build(
        self,
        phi: Formula,
        system: SystemModel,
        horizon: float,
        n: int,
        param_domains: Mapping[str, tuple[float, float]] | None = None,
        name: str = "stlts",
    ) -> EncodingContext:
        """Enc(φ, M, N, T, δ) for a normalized φ."""
        ctx = encode_formula(
            phi, n, horizon, self.encoding_config, system.variable_bounds(), param_domains, name=f"{name}_N{n}"
        )
        system.encode(ctx)
        return ctx

    def _attempt(
        self,
        phi: Formula,
        system: SystemModel,
        horizon: float,
        n: int,
        time_limit: float,
        param_domains: Mapping[str, tuple[float, float]] | None = None,
        objective: str | None = None,
        name: str = "stlts",
    ) -> _Attempt:
        try:
            ctx = self.build(phi, system, horizon, n, param_domains, name)
        except EncodingError as e:
            self.logger.info(f"N={n}: no encoding ({str(e)})")
            return _Attempt(NAttempt(n, "encoding_infeasible", message=str(e)))
        if objective is not None:
            ctx.model.set_objective(ObjectiveSense.MAXIMIZE, ctx.param(objective))

        stats = ctx.model.stats()
        self.logger.info(
            f"N={n}: solving {stats['variables']} variables ({stats['binaries']} binary), "
            f"{stats['constraints'] + stats['conditionals']} constraints, limit {time_limit:.1f}s"
        )
        config = replace(self.solver_config, time_limit=max(1.0, time_limit))
        result = solve(ctx.model, config, self.encoding_config.m_max, self.solver)
        if result.status is SolveStatus.ERROR:
            self.logger.error(f"Solver failed at N={n}")
            raise SolverError(f"solver failed at N={n}", result.output)
        record = NAttempt(
            n,
            result.status.value,
            result.runtime,
            stats["variables"],
            stats["binaries"],
            stats["constraints"] + stats["conditionals"],
            result.objective,
        )
        self.logger.info(f"N={n}: {result.status.value} in {result.runtime:.2f}s")
        return _Attempt(record, ctx, result)

    def _sweep(
        self, phi: Formula, system: SystemModel, horizon: float, ns: Sequence[int], jobs: int, name: str, **kwargs
    ) -> list[_Attempt]:
        """Solve N values in order and stop at the first with a solution. With jobs > 1 every N is solved
        concurrently and the list is returned up to the smallest N with a solution."""
        total = self.solver_config.time_limit
        if jobs > 1 and len(ns) > 1:
            budget = total * min(jobs, len(ns)) / len(ns)
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(self._attempt, phi, system, horizon, n, budget, name=name, **kwargs) for n in ns]
                attempts = [future.result() for future in futures]
            for index, attempt in enumerate(attempts):
                if attempt.has_solution:
                    return attempts[: index + 1]
            return attempts

        attempts = []
        start = time.perf_counter()
        for index, n in enumerate(ns):
            remaining = total - (time.perf_counter() - start)
            if remaining <= 0:
                self.logger.warning(f"Time budget exhausted before N={n}")
                attempts.append(_Attempt(NAttempt(n, SolveStatus.TIME_LIMIT.value, message="budget exhausted")))
                break
            attempt = self._attempt(phi, system, horizon, n, remaining / (len(ns) - index), name=name, **kwargs)
            attempts.append(attempt)
            if attempt.has_solution:
                break
        return attempts

    def validate(
        self,
        phi: Formula,
        trace: PwlTrace,
        gamma: Sequence[float],
        theta: Mapping[Formula, Sequence[bool]],
        values: Mapping[str, float],
        system: SystemModel,
        original: Formula | None = None,
    ) -> ValidationReport:
        """Exact monitor checks of a decoded trace: sat, conservative valuation, robustness, model.

        `phi` is the encoded formula the valuation `theta` belongs to. Sat and robustness are judged on
        `original` when given, so the verdict is about the formula as written rather than its rewrite.
        """
        tolerance = validation_tolerance(trace)
        judged = phi if original is None else original
        report = ValidationReport(
            sat(trace, judged, tolerance),
            robustness(trace, judged),
            [v.to_text() for v in valuation_violations(trace, phi, gamma, theta, self.encoding_config.delta, tolerance)],
            system.check_trace(trace, values, tolerance),
            tolerance,
        )
        self.logger.info(
            f"Validation: sat={report.sat}, robustness={report.robustness:g}, "
            f"{len(report.valuation_violations)} valuation and {len(report.model_issues)} model issues"
        )
        return report

    def _decode_validated(
        self,
        attempt: _Attempt,
        phi: Formula,
        system: SystemModel,
        magnitude: Mapping[str, float] | None = None,
        original: Formula | None = None,
    ) -> tuple[PwlTrace, list[float], dict, dict[str, float], ValidationReport]:
        ctx, result = attempt.ctx, attempt.result
        values = bind_solution(ctx.model, result.values)
        trace, gamma, theta = decode_trace(values, ctx.registry)
        if magnitude:
            phi = instantiate(phi, magnitude)
            original = instantiate(original, magnitude) if original is not None else None
            theta = {instantiate(psi, magnitude): column for psi, column in theta.items()}
        report = self.validate(phi, trace, gamma, theta, values, system, original)
        if not report.ok:
            details = [*report.valuation_violations, *report.model_issues][:5]
            self.logger.error(f"Monitor rejected the trace found at N={ctx.n}: sat={report.sat}; {details}")
            raise MonitorValidationError(f"monitor rejected the trace found at N={ctx.n}: sat={report.sat}; {details}")
        return trace, gamma, theta, values, report

    def synthesize(
        self,
        phi: Formula,
        system: SystemModel,
        horizon: float,
        n_max: int,
        n_min: int = 1,
        jobs: int = 1,
        name: str = "stlts",
    ) -> SynthesisOutcome:
        """First N in [n_min, n_max] whose encoding has a solution, decoded and validated."""
        normalized = normalize(phi)
        if magnitude_parameters(normalized) or timing_parameters(normalized):
            raise ParameterDomainError("synthesis needs a formula without parameters; instantiate it first")
        self.logger.info(f"Synthesizing a trace for {normalized.to_text()} over [0, {horizon:g}], N={n_min}..{n_max}")
        attempts = self._sweep(normalized, system, horizon, list(range(n_min, n_max + 1)), jobs, name)
        records = [attempt.record for attempt in attempts]

        last = attempts[-1] if attempts else None
        if last is not None and last.has_solution:
            trace, gamma, theta, values, report = self._decode_validated(last, normalized, system, original=phi)
            self.logger.info(f"Trace found at N={last.record.n}")
            return SynthesisOutcome(
                OutcomeStatus.TRACE, normalized, last.record.n, trace, gamma, theta, report, records, values
            )

        statuses = {record.status for record in records}
        if SolveStatus.TIME_LIMIT.value in statuses:
            status = OutcomeStatus.TIMEOUT
        elif statuses == {"encoding_infeasible"}:
            status = OutcomeStatus.ENCODING_INFEASIBLE
        else:
            status = OutcomeStatus.NO_TRACE
        self.logger.info(f"No trace up to N={n_max}: {status.value}")
        return SynthesisOutcome(status, normalized, n_max, attempts=records)

    def model_check(
        self, phi: Formula, system: SystemModel, horizon: float, n: int, jobs: int = 1, name: str = "stlts"
    ) -> CheckOutcome:
        """Synthesize a trace of nnf(¬φ); none for every N′ ≤ N certifies φ up to N."""
        dual = self.synthesize(negate(phi), system, horizon, n, 1, jobs, name)
        delta = self.encoding_config.delta
        if dual.status is OutcomeStatus.TRACE:
            verdict = CheckVerdict.COUNTEREXAMPLE
            message = f"counterexample with N={dual.n}, robustness of the negation {dual.validation.robustness:g}"
        elif dual.status is OutcomeStatus.NO_TRACE:
            verdict = CheckVerdict.HOLDS
            message = (
                f"property holds on every trace of '{system.name}' over [0, {horizon:g}] "
                f"up to {n}-bounded variability and δ-robust violations (δ={delta:g})"
            )
        elif dual.status is OutcomeStatus.TIMEOUT:
            verdict = CheckVerdict.TIMEOUT
            message = "time limit reached before every N was decided"
        else:
            verdict = CheckVerdict.ENCODING_INFEASIBLE
            message = "no N in range admits an encoding"
        self.logger.info(f"Model check: {verdict.value} ({message})")
        return CheckOutcome(verdict, n, dual, message)

    def mine_parameter(
        self,
        phi: Formula,
        system: SystemModel,
        horizon: float,
        n: int,
        param_domains: Mapping[str, tuple[float, float]],
        parameter: str | None = None,
        sweep: bool = False,
        n_min: int = 1,
        name: str = "stlts",
    ) -> MiningOutcome:
        """Largest value of the single magnitude parameter for which a trace exists, with a witness."""
        timing = timing_parameters(phi)
        if timing:
            raise ParameterDomainError(f"timing parameters cannot be mined: {', '.join(sorted(timing))}")
        params = sorted(magnitude_parameters(phi))
        if len(params) != 1:
            raise ParameterDomainError(f"mining needs exactly one magnitude parameter, found {params or 'none'}")
        (param,) = params
        if parameter is not None and parameter != param:
            raise ParameterDomainError(f"formula has parameter '{param}', not '{parameter}'")
        if param not in param_domains:
            raise ParameterDomainError(f"parameter '{param}' has no declared domain")
        lo, hi = param_domains[param]
        if math.isinf(lo) or math.isinf(hi):
            raise ParameterDomainError(f"parameter '{param}' needs a bounded domain, got [{lo}, {hi}]")

        normalized = normalize(phi)
        if self.encoding_config.slack_objective:
            self.logger.warning("Slack objective is replaced by maximizing the mined parameter")
        ns = list(range(n_min, n + 1)) if sweep else [n]
        self.logger.info(f"Mining max {param} in [{lo:g}, {hi:g}] for {normalized.to_text()}, N in {ns}")

        attempts: list[_Attempt] = []
        start = time.perf_counter()
        for index, current in enumerate(ns):
            remaining = self.solver_config.time_limit - (time.perf_counter() - start)
            attempts.append(
                self._attempt(
                    normalized,
                    system,
                    horizon,
                    current,
                    remaining / (len(ns) - index),
                    param_domains={param: (lo, hi)},
                    objective=param,
                    name=name,
                )
            )

        per_n: dict[int, float | None] = {}
        best: _Attempt | None = None
        for attempt in attempts:
            value = attempt.result.values.get(f"p_{param}") if attempt.has_solution else None
            per_n[attempt.record.n] = value
            if value is not None and (best is None or value > best.result.values[f"p_{param}"] + 1e-9):
                best = attempt
        records = [attempt.record for attempt in attempts]

        if best is None:
            statuses = {record.status for record in records}
            status = "timeout" if SolveStatus.TIME_LIMIT.value in statuses else "infeasible"
            self.logger.info(f"Mining {param}: {status}")
            return MiningOutcome(param, status, attempts=records, per_n=per_n if sweep else {})

        values = bind_solution(best.ctx.model, best.result.values)
        value = values[f"p_{param}"]
        trace, _, _, _, report = self._decode_validated(best, normalized, system, {param: value}, phi)
        status = "optimal" if best.result.status is SolveStatus.OPTIMAL else "feasible"
        self.logger.info(f"Mined {param} = {value:g} at N={best.record.n} ({status})")
        return MiningOutcome(param, status, value, best.record.n, trace, report, records, per_n if sweep else {})


def synthesize(
    phi: Formula,
    system: SystemModel,
    horizon: float,
    n_max: int,
    encoding_config: EncodingConfig | None = None,
    solver_config: SolverConfig | None = None,
    **kwargs,
) -> SynthesisOutcome:
    return TraceSynthesizer(encoding_config, solver_config).synthesize(phi, system, horizon, n_max, **kwargs)


def model_check(
    phi: Formula,
    system: SystemModel,
    horizon: float,
    n: int,
    encoding_config: EncodingConfig | None = None,
    solver_config: SolverConfig | None = None,
    **kwargs,
) -> CheckOutcome:
    return TraceSynthesizer(encoding_config, solver_config).model_check(phi, system, horizon, n, **kwargs)


def mine_parameter(
    phi: Formula,
    system: SystemModel,
    horizon: float,
    n: int,
    param_domains: Mapping[str, tuple[float, float]],
    encoding_config: EncodingConfig | None = None,
    solver_config: SolverConfig | None = None,
    **kwargs,
) -> MiningOutcome:
    return TraceSynthesizer(encoding_config, solver_config).mine_parameter(
        phi, system, horizon, n, param_domains, **kwargs
    )
