import hashlib
import os
from pathlib import Path

from milp.solution import SolveResult, SolveStatus, format_solution, parse_solution


class SolutionCache:
    """File-based cache of solver results keyed by LP text and adapter."""

    CACHE_DIR = ".stlts_cache"
    CACHEABLE = (SolveStatus.OPTIMAL, SolveStatus.INFEASIBLE)

    @staticmethod
    def _cache_key(lp_text: str, adapter: str) -> str:
        """md5 over the adapter name and the LP text; time limits do not matter for cached statuses."""
        key = f"{adapter}\n{lp_text}"
        return hashlib.md5(key.encode()).hexdigest() + ".sol"

    @classmethod
    def get(cls, lp_text: str, adapter: str, cache_dir: str | Path | None = None) -> SolveResult | None:
        """Retrieve a cached result if available."""
        directory = Path(cache_dir or cls.CACHE_DIR)
        fpath = directory / cls._cache_key(lp_text, adapter)
        if not fpath.exists():
            return None
        status, values = parse_solution(fpath.read_text(encoding="utf-8"))
        return SolveResult(status, values, adapter=adapter, output=f"cached: {fpath}")

    @classmethod
    def set(cls, lp_text: str, adapter: str, result: SolveResult, cache_dir: str | Path | None = None) -> bool:
        """Cache a result; only Optimal and Infeasible results are stored."""
        if result.status not in cls.CACHEABLE:
            return False
        directory = Path(cache_dir or cls.CACHE_DIR)
        os.makedirs(directory, exist_ok=True)
        fpath = directory / cls._cache_key(lp_text, adapter)
        fpath.write_text(format_solution(result.status, result.values), encoding="utf-8")
        return True
