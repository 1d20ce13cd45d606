import pytest

from encoding.stl_encoder import encode_formula
from formula.parser import parse_file
from formula.transforms import normalize
from models.base_model import ModelFactory
from monitor.boolean import sat
from signals.trace import PwlTrace
from synthesis.driver import TraceSynthesizer, decode_trace, validation_tolerance
from synthesis.outcomes import CheckVerdict, OutcomeStatus
from utilities.benchmarks import BENCHMARK_DIR, get_benchmark
from utilities.exceptions import ParameterDomainError

IDENTITY = {"kind": "identity", "variables": {"x": [-10, 10]}}
RAMP = {
    "kind": "rha",
    "name": "ramp",
    "variables": {"x": [0, 10]},
    "modes": {"up": {"flow": {"x": [1, 2]}, "invariant": {"x": [0, 10]}}, "rest": {"flow": {"x": 0}}},
    "transitions": [{"source": "up", "target": "rest", "guard": {"x": [4, 10]}}],
    "initial_modes": "up",
    "initial": {"x": 0},
}


@pytest.fixture
def synthesizer(encoding_config, solver_config, milp_solver):
    return TraceSynthesizer(encoding_config, solver_config, milp_solver)


@pytest.fixture
def offline(encoding_config, solver_config):
    """A synthesizer that must not reach a solver."""
    return TraceSynthesizer(encoding_config, solver_config)


@pytest.fixture
def toy():
    return ModelFactory.load(BENCHMARK_DIR / "toy.json")


class TestDecoding:
    def test_decode_trace_reads_the_registered_columns(self, f, encoding_config):
        phi = normalize(f("F[0, 5] x >= 3"))
        ctx = encode_formula(phi, 2, 10.0, encoding_config, {"x": (-10.0, 10.0)})
        values = {"g_0": 0.0, "g_1": 4.0, "g_2": 10.0, "x_0_x": 0.0, "x_1_x": 5.0, "x_2_x": 1.0}
        for k in range(2):
            values[f"th_{k}_1"] = 1.0
            values[f"th_{k}_2"] = 0.0
        trace, gamma, theta = decode_trace(values, ctx.registry)
        assert gamma == [0.0, 4.0, 10.0]
        assert trace.variables == ("x",)
        assert trace.value_at(2.0)["x"] == pytest.approx(2.5)
        assert theta[phi] == [True, False]

    def test_validation_tolerance_scales_with_the_trace(self):
        small = PwlTrace.from_points([0.0, 1.0], [{"x": 0.5}, {"x": -0.2}])
        large = PwlTrace.from_points([0.0, 1.0], [{"x": 0.5}, {"x": -500.0}])
        assert validation_tolerance(small) == pytest.approx(1e-6)
        assert validation_tolerance(large) == pytest.approx(5e-4)

    def test_validate_flags_an_optimistic_valuation(self, f, offline):
        phi = normalize(f("x >= 3"))
        trace = PwlTrace.from_points([0.0, 1.0, 2.0], [{"x": 4.0}, {"x": 3.5}, {"x": 0.0}])
        system = ModelFactory.from_dict(IDENTITY)
        report = offline.validate(phi, trace, [0.0, 1.0, 2.0], {phi: [True, True]}, {}, system)
        assert report.sat
        assert not report.ok
        assert len(report.valuation_violations) == 1
        assert report.robustness == pytest.approx(1.0)

    def test_validate_judges_the_formula_as_written(self, f, offline):
        phi = normalize(f("x >= 3"))
        trace = PwlTrace.from_points([0.0, 1.0], [{"x": 4.0}, {"x": 4.0}])
        system = ModelFactory.from_dict(IDENTITY)
        report = offline.validate(phi, trace, [0.0, 1.0], {phi: [True]}, {}, system, f("x >= 5"))
        assert not report.sat
        assert not report.valuation_violations
        assert report.robustness == pytest.approx(-1.0)


class TestArguments:
    def test_synthesis_rejects_parameters(self, f, offline, toy):
        with pytest.raises(ParameterDomainError, match="without parameters"):
            offline.synthesize(f("F[0, 5] x >= p", {"p": (0.0, 20.0)}), toy, 5.0, 2)

    @pytest.mark.parametrize(
        "text, domains, parameter, message",
        [
            ("F[0, t] x >= 1", {"t": (1.0, 5.0)}, None, "timing parameters cannot be mined"),
            ("F[0, 5] (x >= p && v >= q)", {"p": (0.0, 1.0), "q": (0.0, 1.0)}, None, "exactly one"),
            ("F[0, 5] x >= 1", {}, None, "exactly one"),
            ("F[0, 5] x >= p", {"p": (0.0, 20.0)}, "q", "not 'q'"),
            ("F[0, 5] x >= p", {"p": (0.0, float("inf"))}, None, "bounded domain"),
        ],
    )
    def test_mining_arguments(self, f, offline, toy, text, domains, parameter, message):
        phi = f(text, domains)
        with pytest.raises(ParameterDomainError, match=message):
            offline.mine_parameter(phi, toy, 5.0, 2, domains, parameter)

    def test_mining_needs_a_declared_domain(self, f, offline, toy):
        phi = f("F[0, 5] x >= p", {"p": (0.0, 20.0)})
        with pytest.raises(ParameterDomainError, match="no declared domain"):
            offline.mine_parameter(phi, toy, 5.0, 2, {})

    def test_unencodable_horizon_is_reported_per_n(self, f, offline):
        system = ModelFactory.from_dict(IDENTITY)
        outcome = offline.synthesize(f("F x >= 1"), system, 1e-5, 2)
        assert outcome.status is OutcomeStatus.ENCODING_INFEASIBLE
        assert [attempt.status for attempt in outcome.attempts] == ["encoding_infeasible"] * 2
        assert "cannot hold" in outcome.attempts[0].message

        check = offline.model_check(f("G x <= 1"), system, 1e-5, 2)
        assert check.verdict is CheckVerdict.ENCODING_INFEASIBLE


@pytest.mark.solver
class TestSolverBacked:
    def test_synthesis_on_the_double_integrator(self, f, synthesizer, toy):
        phi = f("F[0, 5] x >= 3")
        outcome = synthesizer.synthesize(phi, toy, 5.0, 6)
        assert outcome.status is OutcomeStatus.TRACE
        assert outcome.validation.ok
        assert outcome.n >= 2
        assert outcome.trace.horizon == pytest.approx(5.0)
        assert sat(outcome.trace, phi, outcome.validation.tolerance)
        data = outcome.to_dict()
        assert data["status"] == "trace"
        assert len(data["attempts"]) == outcome.n

    def test_unreachable_goal_has_no_trace(self, f, synthesizer, toy):
        outcome = synthesizer.synthesize(f("F[0, 5] x >= 15"), toy, 5.0, 3)
        assert outcome.status is OutcomeStatus.NO_TRACE
        assert [attempt.n for attempt in outcome.attempts] == [1, 2, 3]
        assert outcome.trace is None

    def test_model_check_finds_a_counterexample(self, f, synthesizer, toy):
        outcome = synthesizer.model_check(f("G[0, 5] x <= 3"), toy, 5.0, 4)
        assert outcome.verdict is CheckVerdict.COUNTEREXAMPLE
        assert not sat(outcome.counterexample, f("G[0, 5] x <= 3"))

    def test_model_check_certifies_the_velocity_invariant(self, synthesizer):
        bench = get_benchmark("inv")
        outcome = synthesizer.model_check(
            parse_file(bench.spec).formula, ModelFactory.load(bench.model), bench.horizon, bench.n
        )
        assert outcome.verdict is CheckVerdict.HOLDS
        assert outcome.counterexample is None
        assert "δ-robust" in outcome.message

    def test_mining_is_conservative_by_delta(self, synthesizer, toy):
        spec = parse_file(BENCHMARK_DIR / "toy_p.stl")
        outcome = synthesizer.mine_parameter(spec.formula, toy, 5.0, 6, spec.params)
        assert outcome.found
        assert outcome.parameter == "p"
        # a unit acceleration reaches 12.5 at t = 5
        assert 11.5 < outcome.value <= 12.4 + 1e-4
        assert outcome.validation.ok
        assert outcome.trace.variables == ("x", "v", "a")

    @pytest.mark.slow
    def test_mining_sweep_reports_every_n(self, synthesizer, toy):
        spec = parse_file(BENCHMARK_DIR / "toy_p.stl")
        outcome = synthesizer.mine_parameter(spec.formula, toy, 5.0, 4, spec.params, sweep=True)
        assert sorted(outcome.per_n) == [1, 2, 3, 4]
        assert outcome.value == pytest.approx(max(v for v in outcome.per_n.values() if v is not None))

    def test_synthesis_on_a_rectangular_hybrid_automaton(self, f, synthesizer):
        system = ModelFactory.from_dict(RAMP)
        phi = f("F[0, 10] x >= 5")
        outcome = synthesizer.synthesize(phi, system, 10.0, 4)
        assert outcome.status is OutcomeStatus.TRACE
        assert outcome.validation.ok
        assert sat(outcome.trace, phi, outcome.validation.tolerance)
        assert system.check_trace(outcome.trace, outcome.values, outcome.validation.tolerance) == []
        assert outcome.trace.states[0]["x"] == pytest.approx(0.0, abs=1e-6)

    def test_bounded_until_is_validated_as_written(self, f, synthesizer):
        system = ModelFactory.from_dict(IDENTITY)
        phi = f("x >= 1 U[2, 3] x >= 5")
        outcome = synthesizer.synthesize(phi, system, 5.0, 4)
        assert outcome.status is OutcomeStatus.TRACE
        assert outcome.validation.ok
        assert sat(outcome.trace, phi, outcome.validation.tolerance)
        assert outcome.validation.robustness >= 0.0
