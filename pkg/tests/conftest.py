import os

import numpy as np
import pytest

from formula.parser import parse_formula
from milp.solvers.base_solver import SolverFactory
from signals.trace import PwlTrace
from utilities.config import EncodingConfig, SolverConfig
from utilities.exceptions import SolverError


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="also run slow benchmark tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def log_dir(tmp_path_factory, monkeypatch):
    # keep log files of the named loggers out of the working tree
    monkeypatch.setenv("STLTS_LOG_DIR", str(tmp_path_factory.getbasetemp() / "logs"))


@pytest.fixture(scope="session")
def milp_solver():
    try:
        solver = SolverFactory.default(os.getenv("STLTS_SOLVER"))
    except SolverError as e:
        pytest.skip(f"no MILP solver: {e}")
    if not solver.available():
        pytest.skip(f"{solver.name} is not installed")
    return solver


@pytest.fixture
def encoding_config():
    return EncodingConfig(delta=0.1, epsilon=1e-4, beta=8)


@pytest.fixture
def solver_config(tmp_path):
    return SolverConfig(time_limit=120.0, work_dir=tmp_path, cache_dir=tmp_path / "cache")


@pytest.fixture
def ramp():
    """x rises 0 → 10 over [0, 10], y stays at 1."""
    return PwlTrace.from_points([0.0, 10.0], [{"x": 0.0, "y": 1.0}, {"x": 10.0, "y": 1.0}])


@pytest.fixture
def bump():
    """x goes 0 → 4 → 0 over [0, 4]."""
    return PwlTrace.from_points([0.0, 2.0, 4.0], [{"x": 0.0}, {"x": 4.0}, {"x": 0.0}])


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def f():
    """Shorthand for parsing a bare formula."""
    return parse_formula
