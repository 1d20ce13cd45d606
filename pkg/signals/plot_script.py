from pathlib import Path
from typing import Sequence


def gnuplot_script(
    trace_csv: str | Path, variables: Sequence[str], title: str | None = None, image: str | Path | None = None
) -> str:
    """Build a gnuplot script that draws each variable of a trace CSV against time.

    `variables` must be in CSV column order (the order `write_csv` uses). With `image`, the script
    renders a PNG instead of opening a window.
    """
    lines = ['set datafile separator ","', 'set xlabel "time"', "set grid", "set key outside right"]
    if title:
        lines.append(f'set title "{title}"')
    if image is not None:
        lines.append("set terminal pngcairo size 1200,600")
        lines.append(f'set output "{Path(image).as_posix()}"')

    source = Path(trace_csv).as_posix()
    series = [
        f'"{source}" every ::1 using 1:{column} with linespoints title "{name}"'
        for column, name in enumerate(variables, start=2)
    ]
    lines.append("plot " + ", \\\n     ".join(series))
    if image is None:
        lines.append("pause mouse close")
    return "\n".join(lines) + "\n"


def write_gnuplot_script(
    trace_csv: str | Path, variables: Sequence[str], out: str | Path, title: str | None = None
) -> Path:
    out = Path(out)
    out.write_text(gnuplot_script(trace_csv, variables, title), encoding="utf-8")
    return out
