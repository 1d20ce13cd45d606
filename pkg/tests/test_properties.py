from dataclasses import dataclass, replace

import numpy as np
import pytest

from formula.ast import subformulas
from formula.transforms import delta_tighten, normalize
from models.base_model import ModelFactory
from monitor.boolean import BooleanMonitor, sat
from monitor.robustness import robustness
from monitor.valuation import is_delta_stable
from signals.trace import PwlTrace
from synthesis.driver import TraceSynthesizer
from synthesis.outcomes import OutcomeStatus
from utilities.benchmarks import BENCHMARK_DIR

HORIZON = 10.0
IDENTITY = {"kind": "identity", "variables": {"x": [-10, 10], "y": [-10, 10]}}
RAMP = {
    "kind": "rha",
    "name": "ramp",
    "variables": {"x": [0, 10]},
    "modes": {"up": {"flow": {"x": [1, 2]}, "invariant": {"x": [0, 10]}}, "rest": {"flow": {"x": 0}}},
    "transitions": [{"source": "up", "target": "rest", "guard": {"x": [4, 10]}}],
    "initial_modes": "up",
    "initial": {"x": 0},
}

pytestmark = pytest.mark.solver


@dataclass(frozen=True)
class Subject:
    """A model with the thresholds its random atoms draw from."""

    model: dict | str
    thresholds: dict[str, tuple[float, float]]
    horizon: float = HORIZON
    n_max: int = 3

    def load(self):
        if isinstance(self.model, dict):
            return ModelFactory.from_dict(self.model)
        return ModelFactory.load(BENCHMARK_DIR / self.model)


SUBJECTS = {
    "identity": Subject(IDENTITY, {"x": (-4.0, 4.0), "y": (-4.0, 4.0)}),
    "double_integrator": Subject("toy.json", {"x": (-4.0, 4.0), "v": (-2.0, 2.0)}),
    "rha": Subject(RAMP, {"x": (1.0, 9.0)}),
    # every interval of the heater spans at most eight sampled time units
    "closed_form": Subject("heater.json", {"temp": (15.0, 27.0)}, horizon=8.0),
}


def instance_count(request, quick: int, full: int) -> int:
    return full if request.config.getoption("--runslow") else quick


def random_window(rng, unbounded: bool = True) -> str:
    if unbounded and rng.random() < 0.3:
        return ""
    a = int(rng.integers(0, 3))
    b = a + int(rng.integers(1, 4))
    return f"[{a}, {b}]"


def random_formula(rng, depth: int, thresholds: dict[str, tuple[float, float]] | None = None) -> str:
    """Random formula over the variables of `thresholds`, with every operator and both window kinds."""
    thresholds = thresholds or SUBJECTS["identity"].thresholds
    if depth == 0 or rng.random() < 0.25:
        variable = str(rng.choice(sorted(thresholds)))
        op = rng.choice([">=", "<="])
        return f"{variable} {op} {round(float(rng.uniform(*thresholds[variable])), 1)}"
    kind = rng.choice(["&&", "||", "F", "G", "U", "R"])
    if kind in ("&&", "||"):
        return f"({random_formula(rng, depth - 1, thresholds)} {kind} {random_formula(rng, depth - 1, thresholds)})"
    if kind in ("U", "R"):
        left = random_formula(rng, depth - 1, thresholds)
        right = random_formula(rng, depth - 1, thresholds)
        return f"(({left}) {kind}{random_window(rng)} ({right}))"
    return f"{kind}{random_window(rng)} ({random_formula(rng, depth - 1, thresholds)})"


def random_trace(rng, knots: int = 3) -> PwlTrace:
    inner = np.unique(np.round(rng.uniform(0.5, HORIZON - 0.5, size=knots - 2), 2))
    times = [0.0, *(float(t) for t in inner), HORIZON]
    states = [{"x": float(rng.uniform(-5, 5)), "y": float(rng.uniform(-5, 5))} for _ in times]
    return PwlTrace.from_points(times, states)


def stable_partition(trace: PwlTrace, phi, delta: float, spacing: float = 1e-3) -> list[float]:
    """Knots of σ plus every truth-set endpoint of each ψ and ψ^δ inside [0, T]."""
    monitor = BooleanMonitor(trace)
    points = {float(t) for t in trace.times}
    for psi in subformulas(phi):
        for truth in (monitor.evaluate(psi), monitor.evaluate(delta_tighten(psi, delta))):
            for interval in truth.clip(0.0, trace.horizon):
                points.update(t for t in (interval.lo, interval.hi) if 0.0 < t < trace.horizon)
    gamma = [0.0]
    for t in sorted(points - {0.0, trace.horizon}):
        if t - gamma[-1] >= spacing and trace.horizon - t >= spacing:
            gamma.append(t)
    gamma.append(trace.horizon)
    return gamma


@pytest.fixture
def synthesizer(encoding_config, solver_config, milp_solver):
    return TraceSynthesizer(encoding_config, solver_config, milp_solver)


def test_random_formulas_cover_every_operator(rng):
    texts = [random_formula(rng, 3) for _ in range(200)]
    for token in ("&&", "||", "F[", "G[", "U[", "R[", "F (", "G (", "U (", "R ("):
        assert any(token in text for text in texts), token


@pytest.mark.parametrize("subject", sorted(SUBJECTS))
def test_synthesized_traces_satisfy_the_formula(request, rng, f, synthesizer, subject):
    spec = SUBJECTS[subject]
    system = spec.load()
    for _ in range(instance_count(request, 4, 40)):
        phi = f(random_formula(rng, int(rng.integers(2, 4)), spec.thresholds))
        n = int(rng.integers(1, spec.n_max + 1))
        outcome = synthesizer.synthesize(phi, system, spec.horizon, n, n_min=n)
        assert outcome.status in (OutcomeStatus.TRACE, OutcomeStatus.NO_TRACE), phi.to_text()
        if outcome.status is OutcomeStatus.TRACE:
            assert outcome.validation.ok, phi.to_text()
            assert sat(outcome.trace, phi, outcome.validation.tolerance), phi.to_text()
            assert outcome.validation.robustness >= -outcome.validation.tolerance
            assert system.check_trace(outcome.trace, outcome.values, outcome.validation.tolerance) == []


def test_robust_traces_fit_the_encoding(request, rng, f, encoding_config, solver_config, milp_solver):
    delta = encoding_config.delta
    synthesizer = TraceSynthesizer(encoding_config, replace(solver_config, time_limit=60.0), milp_solver)
    identity = SUBJECTS["identity"].load()
    wanted = instance_count(request, 5, 40)
    checked = 0
    for _ in range(40 * wanted):
        if checked == wanted:
            break
        phi = normalize(f(random_formula(rng, 1)))
        trace = random_trace(rng)
        if robustness(trace, phi) < delta:
            continue
        gamma = stable_partition(trace, phi, delta)
        n = len(gamma) - 1
        if n > 5 or not is_delta_stable(trace, phi, gamma, delta):
            continue
        outcome = synthesizer.synthesize(phi, identity, HORIZON, n, n_min=n)
        assert outcome.status is OutcomeStatus.TRACE, f"{phi.to_text()} at N={n} on {trace!r}"
        checked += 1
    assert checked == wanted
