import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from dotenv import load_dotenv

from utilities.exceptions import ConfigError

DEFAULT_DELTA = 0.1
DEFAULT_EPSILON = 1e-4
DEFAULT_BETA = 8
DEFAULT_M_MAX = 1e6
DEFAULT_TIME_LIMIT = 600.0

logger = logging.getLogger(__name__)


@dataclass
class EncodingConfig:
    delta: float = DEFAULT_DELTA
    epsilon: float = DEFAULT_EPSILON
    beta: int = DEFAULT_BETA
    m_max: float = DEFAULT_M_MAX
    slack_objective: bool = False

    def validate(self) -> "EncodingConfig":
        if self.delta <= 0:
            raise ConfigError(f"delta must be positive, got {self.delta}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.beta < 1:
            raise ConfigError(f"beta must be at least 1, got {self.beta}")
        if self.epsilon >= self.delta / 10:
            logger.warning(f"epsilon={self.epsilon} is not much smaller than delta={self.delta}; completeness may suffer")
        return self


@dataclass
class SolverConfig:
    adapter: str | None = None
    time_limit: float = DEFAULT_TIME_LIMIT
    executable: str | None = None
    keep_files: bool = False
    work_dir: Path | None = None
    use_cache: bool = False
    cache_dir: Path = Path(".stlts_cache")

    @classmethod
    def from_env(cls, **overrides) -> "SolverConfig":
        """Build a solver configuration from `.env` / environment, then apply explicit overrides."""
        load_dotenv()
        config = cls()
        env_solver = os.getenv("STLTS_SOLVER")
        if env_solver:
            config.adapter = env_solver
        env_limit = os.getenv("STLTS_TIME_LIMIT")
        if env_limit:
            config.time_limit = float(env_limit)
        env_cache = os.getenv("STLTS_CACHE_DIR")
        if env_cache:
            config.cache_dir = Path(env_cache)
        for key, value in overrides.items():
            if value is not None:
                setattr(config, key, value)
        return config


@dataclass
class RunConfig:
    spec_path: Path | None = None
    model_path: Path | None = None
    horizon: float | None = None
    n: int | None = None
    n_min: int = 1
    n_max: int | None = None
    jobs: int = 1
    param: str | None = None
    out: Path | None = None
    dump_encoding: Path | None = None
    plot: Path | None = None
    encoding: EncodingConfig = field(default_factory=EncodingConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)

    def validate(self) -> "RunConfig":
        self.encoding.validate()
        if self.horizon is not None and self.horizon <= 0:
            raise ConfigError(f"horizon must be positive, got {self.horizon}")
        if self.n is not None and self.n < 1:
            raise ConfigError(f"N must be at least 1, got {self.n}")
        if self.n_min < 1:
            raise ConfigError(f"minimum N must be at least 1, got {self.n_min}")
        if self.n_max is not None and self.n_max < self.n_min:
            raise ConfigError(f"maximum N {self.n_max} is below minimum N {self.n_min}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
        return self
