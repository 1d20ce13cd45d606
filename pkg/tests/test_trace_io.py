import json

import numpy as np
import pytest

from signals.plot_script import gnuplot_script, write_gnuplot_script
from signals.trace import PwlTrace
from signals.trace_io import read_csv, read_trace, trace_to_dict, write_trace
from utilities.exceptions import TraceError


@pytest.fixture
def awkward():
    return PwlTrace.from_points(
        [0.0, 0.1, 1.0 / 3.0], [{"x": 0.1, "v": -2.0}, {"x": 1e-12, "v": 7.25}, {"x": 123456.789, "v": 0.0}]
    )


def test_csv_keeps_doubles_exact(tmp_path, awkward):
    path = tmp_path / "trace.csv"
    write_trace(awkward, path)
    assert path.read_text().splitlines()[0] == "time,x,v"
    back = read_trace(path)
    assert back.variables == awkward.variables
    np.testing.assert_array_equal(back.times, awkward.times)
    np.testing.assert_array_equal(back.base.values, awkward.base.values)


def test_json_document(tmp_path, awkward):
    path = tmp_path / "trace.json"
    write_trace(awkward, path)
    document = json.loads(path.read_text())
    assert document == trace_to_dict(awkward)
    assert document["states"][1] == {"x": 1e-12, "v": 7.25}
    assert read_trace(path).base.states == awkward.base.states


def test_format_is_chosen_by_suffix(tmp_path, awkward):
    with pytest.raises(TraceError, match="unknown trace format"):
        write_trace(awkward, tmp_path / "trace.txt")
    with pytest.raises(TraceError, match="unknown trace format"):
        read_trace(tmp_path / "trace.parquet")


def test_csv_needs_time_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x\n0,1\n1,2\n")
    with pytest.raises(TraceError, match="'time'"):
        read_csv(path)


def test_json_needs_times(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"states": [{"x": 0}]}))
    with pytest.raises(TraceError, match="missing 'times'"):
        read_trace(path)


def test_gnuplot_script(tmp_path):
    script = gnuplot_script("out/trace.csv", ["xf", "xr"], title="rnc1")
    assert 'set datafile separator ","' in script
    assert 'set title "rnc1"' in script
    assert '"out/trace.csv" every ::1 using 1:2 with linespoints title "xf"' in script
    assert "using 1:3" in script
    assert script.rstrip().endswith("pause mouse close")

    image = gnuplot_script("trace.csv", ["x"], image=tmp_path / "plot.png")
    assert "pngcairo" in image
    assert "pause" not in image

    path = write_gnuplot_script("trace.csv", ["x"], tmp_path / "plot.gp")
    assert path.read_text(encoding="utf-8").startswith("set datafile")
