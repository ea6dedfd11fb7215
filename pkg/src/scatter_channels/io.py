"""Plain-text writers: CSV tables, JSON reports, gnuplot scripts.

Numbers are written with ``repr`` (shortest round-trip form), so identical
inputs give byte-identical files.  The only varying line is the optional
banner comment at the top of each CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path


def fmt(value):
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return value
    v = float(value)
    if math.isnan(v):
        return "nan"
    return repr(v)


def banner_line(command):
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return f"# scatter-channels {command} generated {stamp}"


class Table:
    """Column-ordered table with optional trailing comment lines."""

    def __init__(self, columns, rows=(), footer=()):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]
        self.footer = list(footer)

    def add(self, row):
        if isinstance(row, dict):
            row = [row[c] for c in self.columns]
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
        self.rows.append(list(row))

    def render(self, banner=None):
        buf = io.StringIO()
        if banner:
            buf.write(banner + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        for line in self.footer:
            buf.write(f"# {line}\n")
        return buf.getvalue()


def dumps_json(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, str, int)) or obj is None:
        return obj
    if hasattr(obj, "tolist"):
        return _plain(obj.tolist())
    v = float(obj)
    return None if math.isnan(v) else v


def body(text):
    """CSV text without a leading banner comment."""
    lines = text.splitlines(keepends=True)
    if lines and lines[0].startswith("# scatter-channels"):
        lines = lines[1:]
    return "".join(lines)


def gnuplot_script(csv_name, xcol, ycols, xlabel, ylabel, title):
    """Gnuplot commands plotting columns (1-based) of a comma-separated file."""
    plots = ", \\\n     ".join(
        f"'{csv_name}' using {xcol}:{c} with lines title '{name}'" for c, name in ycols
    )
    return (
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        "set key autotitle columnhead\n"
        f"set title '{title}'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        f"plot {plots}\n"
    )


def write_outputs(out_dir, files):
    """Write {name: text} into out_dir; returns the written paths.

    Everything is rendered before this is called, so a failed computation
    leaves no partial files behind.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, text in files.items():
        path = out / name
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)
        paths.append(path)
    return paths
