import json
from dataclasses import dataclass
from pathlib import Path

from utilities.exceptions import ConfigError

BENCHMARK_DIR = Path(__file__).resolve().parent.parent / "benchmarks"
MANIFEST = "manifest.json"


@dataclass
class Benchmark:
    """One named entry of `benchmarks/manifest.json`. Paths are absolute."""

    name: str
    spec: Path
    model: Path
    horizon: float | None = None
    n: int | None = None
    n_max: int | None = None
    param: str | None = None
    expected_n: int | None = None
    long_running: bool = False


def load_manifest(directory: str | Path = BENCHMARK_DIR) -> dict[str, Benchmark]:
    directory = Path(directory)
    path = directory / MANIFEST
    try:
        with open(path, encoding="utf-8") as f:
            entries = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"benchmark manifest not found: {path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON ({e.msg}, line {e.lineno})") from e

    benchmarks = {}
    for name, entry in entries.items():
        try:
            benchmarks[name] = Benchmark(
                name,
                directory / entry["spec"],
                directory / entry["model"],
                entry.get("horizon"),
                entry.get("n"),
                entry.get("n_max"),
                entry.get("param"),
                entry.get("expected_n"),
                entry.get("long_running", False),
            )
        except KeyError as e:
            raise ConfigError(f"benchmark '{name}' is missing '{e.args[0]}'") from None
    return benchmarks


def get_benchmark(name: str, directory: str | Path = BENCHMARK_DIR) -> Benchmark:
    benchmarks = load_manifest(directory)
    if name not in benchmarks:
        raise ConfigError(f"Unknown benchmark: {name} (available: {', '.join(sorted(benchmarks))})")
    return benchmarks[name]
