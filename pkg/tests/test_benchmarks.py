import json
from dataclasses import replace

import pytest

from formula.ast import formula_variables, magnitude_parameters
from formula.parser import parse_file
from formula.transforms import normalize
from models.base_model import ModelFactory
from synthesis.driver import TraceSynthesizer
from synthesis.outcomes import OutcomeStatus
from utilities.benchmarks import get_benchmark, load_manifest
from utilities.config import EncodingConfig
from utilities.exceptions import ConfigError

BENCHMARKS = sorted(load_manifest())
SWEEPS = [name for name, bench in load_manifest().items() if bench.n_max is not None]


def test_manifest_lists_the_shipped_benchmarks():
    assert {"rnc1", "rnc2", "rnc3", "nav1", "nav2", "inv", "toy", "heater"} <= set(BENCHMARKS)
    assert get_benchmark("nav1").long_running
    assert get_benchmark("toy").param == "p"
    assert {name: get_benchmark(name).expected_n for name in ("rnc1", "rnc2", "rnc3", "nav1", "nav2")} == {
        "rnc1": 3,
        "rnc2": 4,
        "rnc3": 3,
        "nav1": 17,
        "nav2": 11,
    }


@pytest.mark.parametrize("name", BENCHMARKS)
def test_benchmark_files_are_consistent(name):
    bench = get_benchmark(name)
    spec = parse_file(bench.spec)
    model = ModelFactory.load(bench.model)
    assert formula_variables(spec.formula) <= set(model.variables)
    assert set(spec.params) == magnitude_parameters(spec.formula)
    assert model.horizon == bench.horizon
    normalize(spec.formula)


def test_unknown_benchmark():
    with pytest.raises(ConfigError, match="Unknown benchmark: rnc9"):
        get_benchmark("rnc9")


def test_manifest_errors(tmp_path):
    with pytest.raises(ConfigError, match="manifest not found"):
        load_manifest(tmp_path)
    (tmp_path / "manifest.json").write_text(json.dumps({"broken": {"spec": "a.stl"}}), encoding="utf-8")
    with pytest.raises(ConfigError, match="'broken' is missing 'model'"):
        load_manifest(tmp_path)


@pytest.mark.slow
@pytest.mark.solver
@pytest.mark.parametrize("name", SWEEPS)
def test_benchmark_synthesis(name, milp_solver, solver_config):
    bench = get_benchmark(name)
    spec = parse_file(bench.spec)
    synthesizer = TraceSynthesizer(EncodingConfig(), replace(solver_config, time_limit=600.0), milp_solver)
    outcome = synthesizer.synthesize(spec.formula, ModelFactory.load(bench.model), bench.horizon, bench.n_max, name=name)
    assert outcome.status is OutcomeStatus.TRACE
    assert outcome.validation.ok
    assert outcome.n <= bench.n_max
    if bench.expected_n is not None:
        assert outcome.n == bench.expected_n
