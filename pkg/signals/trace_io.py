import json
import logging
from pathlib import Path

import pandas as pd

from signals.trace import PwlTrace
from utilities.exceptions import TraceError

logger = logging.getLogger(__name__)


def write_csv(trace: PwlTrace, path: str | Path):
    """Header `time,var1,var2,...`, one row per knot. 17 significant digits keep doubles exact."""
    trace.to_frame().to_csv(path, index=False, float_format="%.17g")


def read_csv(path: str | Path) -> PwlTrace:
    frame = pd.read_csv(path, float_precision="round_trip")
    if frame.columns.empty or frame.columns[0] != "time":
        raise TraceError(f"{path}: first CSV column must be 'time'")
    columns = {name: frame[name].to_numpy(dtype=float) for name in frame.columns[1:]}
    if not columns:
        raise TraceError(f"{path}: trace has no state variables")
    return PwlTrace.from_columns(frame["time"].to_numpy(dtype=float), columns)


def trace_to_dict(trace: PwlTrace) -> dict:
    return {"times": [float(t) for t in trace.times], "states": trace.base.states}


def trace_from_dict(data: dict) -> PwlTrace:
    try:
        return PwlTrace.from_points(data["times"], data["states"])
    except KeyError as error:
        raise TraceError(f"trace document is missing '{error.args[0]}'") from None


def write_json(trace: PwlTrace, path: str | Path):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(trace_to_dict(trace), handle, indent=2)


def read_json(path: str | Path) -> PwlTrace:
    with open(path, encoding="utf-8") as handle:
        return trace_from_dict(json.load(handle))


def write_trace(trace: PwlTrace, path: str | Path):
    path = Path(path)
    if path.suffix == ".csv":
        write_csv(trace, path)
    elif path.suffix == ".json":
        write_json(trace, path)
    else:
        raise TraceError(f"unknown trace format '{path.suffix}' (use .csv or .json)")
    logger.debug(f"Wrote trace with {len(trace.times)} knots to {path}")


def read_trace(path: str | Path) -> PwlTrace:
    path = Path(path)
    if path.suffix == ".csv":
        return read_csv(path)
    elif path.suffix == ".json":
        return read_json(path)
    else:
        raise TraceError(f"unknown trace format '{path.suffix}' (use .csv or .json)")
