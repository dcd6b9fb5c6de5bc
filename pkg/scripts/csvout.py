"""Tiny CSV writer shared by the experiment scripts."""

import csv
import sys


def _fmt(v):
    return format(v, ".15g") if isinstance(v, float) else str(v)


def write_rows(path, header, rows):
    """Write rows to ``path`` (or stdout for '-') with 15 significant digits."""
    if str(path) == "-":
        _write(sys.stdout, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _write(fh, header, rows)


def _write(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    w.writerows([_fmt(v) for v in row] for row in rows)
