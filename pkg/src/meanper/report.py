"""Deterministic CSV / JSON writers for run artifacts."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    """Shortest round-trip decimal text; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        return "0.0"  # drops the sign of -0.0
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return repr(x)


def write_csv(path: Path, columns, rows) -> Path:
    lines = ["# columns: " + ",".join(columns), ",".join(columns)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_json(path: Path, payload: dict) -> Path:
    def clean(v):
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        if isinstance(v, (np.floating, np.integer, np.bool_)):
            return v.item()
        if isinstance(v, float) and not math.isfinite(v):
            return str(v)
        return v

    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


SPECTRUM_COLUMNS = ("index", "re_lambda", "im_lambda", "multiplicity", "abs_That", "abs_That_n", "sigma")
COEFF_COLUMNS = ("index", "re_lambda", "im_lambda", "eta", "re_c", "im_c", "probe_spread")
EXTENSION_COLUMNS = ("t", "re_f", "im_f")
FUNCTIONAL_COLUMNS = ("index", "abs_lambda", "term", "partial_sum")


def spectrum_rows(S):
    for p in S:
        d = p.derivs
        n = p.multiplicity
        yield (
            p.index,
            p.lam.real,
            p.lam.imag,
            n,
            abs(d[0]) if d else None,
            abs(d[n]) if len(d) > n else None,
            p.sigma,
        )


def coeff_rows(table):
    for idx, lam, eta, c, spread in table.rows():
        yield idx, lam.real, lam.imag, eta, c.real, c.imag, spread


def extension_rows(grid, samples):
    for t, v in zip(grid, samples):
        yield t, v.real, v.imag


def functional_rows(S, terms, partial_sums):
    pts = sorted(S.points, key=lambda p: p.index)
    for p, term, total in zip(pts, terms, partial_sums):
        yield p.index, abs(p.lam), term, total
