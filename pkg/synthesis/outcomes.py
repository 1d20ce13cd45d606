import enum
from dataclasses import dataclass, field

from formula.ast import Formula
from signals.trace import PwlTrace
from signals.trace_io import trace_to_dict


class OutcomeStatus(enum.Enum):
    TRACE = "trace"
    NO_TRACE = "no_trace_up_to_n"
    TIMEOUT = "timeout"
    ENCODING_INFEASIBLE = "encoding_infeasible"


class CheckVerdict(enum.Enum):
    HOLDS = "HOLDS"
    COUNTEREXAMPLE = "COUNTEREXAMPLE"
    TIMEOUT = "TIMEOUT"
    ENCODING_INFEASIBLE = "ENCODING_INFEASIBLE"


@dataclass
class NAttempt:
    """Solver statistics for one N of a sweep."""

    n: int
    status: str
    runtime: float = 0.0
    variables: int = 0
    binaries: int = 0
    constraints: int = 0
    objective: float | None = None
    message: str = ""

    def to_dict(self) -> dict:
        data = {
            "n": self.n,
            "status": self.status,
            "runtime": round(self.runtime, 6),
            "variables": self.variables,
            "binaries": self.binaries,
            "constraints": self.constraints,
        }
        if self.objective is not None:
            data["objective"] = self.objective
        if self.message:
            data["message"] = self.message
        return data


@dataclass
class ValidationReport:
    """Monitor verdicts on a decoded trace. `ok` only when every check passed."""

    sat: bool
    robustness: float
    valuation_violations: list[str] = field(default_factory=list)
    model_issues: list[str] = field(default_factory=list)
    tolerance: float = 0.0

    @property
    def ok(self) -> bool:
        return self.sat and not self.valuation_violations and not self.model_issues

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "sat": self.sat,
            "robustness": self.robustness,
            "valuation_violations": self.valuation_violations,
            "model_issues": self.model_issues,
            "tolerance": self.tolerance,
        }


@dataclass
class SynthesisOutcome:
    status: OutcomeStatus
    formula: Formula
    n: int | None = None
    trace: PwlTrace | None = None
    gamma: list[float] = field(default_factory=list)
    theta: dict[Formula, list[bool]] = field(default_factory=dict)
    validation: ValidationReport | None = None
    attempts: list[NAttempt] = field(default_factory=list)
    values: dict[str, float] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status is OutcomeStatus.TRACE

    @property
    def runtime(self) -> float:
        return sum(attempt.runtime for attempt in self.attempts)

    def to_dict(self) -> dict:
        data = {
            "status": self.status.value,
            "formula": self.formula.to_text(),
            "n": self.n,
            "runtime": round(self.runtime, 6),
            "attempts": [attempt.to_dict() for attempt in self.attempts],
        }
        if self.trace is not None:
            data["trace"] = trace_to_dict(self.trace)
            data["gamma"] = list(self.gamma)
            data["theta"] = {psi.to_text(): values for psi, values in self.theta.items()}
        if self.validation is not None:
            data["validation"] = self.validation.to_dict()
        return data


@dataclass
class CheckOutcome:
    verdict: CheckVerdict
    n: int
    synthesis: SynthesisOutcome
    message: str = ""

    @property
    def counterexample(self) -> PwlTrace | None:
        return self.synthesis.trace

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "n": self.n,
            "message": self.message,
            "dual": self.synthesis.to_dict(),
        }


@dataclass
class MiningOutcome:
    parameter: str
    status: str
    value: float | None = None
    n: int | None = None
    trace: PwlTrace | None = None
    validation: ValidationReport | None = None
    attempts: list[NAttempt] = field(default_factory=list)
    per_n: dict[int, float | None] = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        data = {
            "parameter": self.parameter,
            "status": self.status,
            "value": self.value,
            "n": self.n,
            "attempts": [attempt.to_dict() for attempt in self.attempts],
        }
        if self.per_n:
            data["per_n"] = {str(n): value for n, value in self.per_n.items()}
        if self.trace is not None:
            data["trace"] = trace_to_dict(self.trace)
        if self.validation is not None:
            data["validation"] = self.validation.to_dict()
        return data
