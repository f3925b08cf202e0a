"""Parameter grids, parallel evaluation and CSV emission."""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NatransError
from .estimators import DEFAULTS, ESTIMATORS, MODELS, SUPPORTED, evaluate_point, make_params

FIELDS = ("probability", "amplitude", "valid", "error")


def parse_grid(text) -> list[float]:
    """``start:stop:step`` (stop inclusive), a comma list, or a single number."""
    if isinstance(text, (int, float)):
        values = [float(text)]
    elif isinstance(text, (list, tuple)):
        values = [float(v) for v in text]
    else:
        text = str(text).strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(f"grid {text!r} must look like start:stop:step")
            start, stop, step = map(float, parts)
            if not step > 0 or stop < start:
                raise ValueError(f"grid {text!r} needs step > 0 and stop >= start")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            values = [float(f"{start + i * step:.12g}") for i in range(n)]
        else:
            values = [float(v) for v in text.split(",") if v.strip()]
    if not values:
        raise ValueError("empty grid axis")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("grid values must be finite")
    return values


@dataclass
class SweepTable:
    """One row per grid point, one column group per estimator."""

    model: str
    axes: dict
    estimators: tuple
    rows: list = field(default_factory=list)
    failures: int = 0

    @property
    def columns(self) -> list[str]:
        return list(self.axes) + [f"{e}_{f}" for e in self.estimators for f in FIELDS]

    def points(self):
        return [dict(zip(self.axes, combo)) for combo in itertools.product(*self.axes.values())]


def _cell(args):
    model, point, estimator, tols = args
    try:
        r = evaluate_point(model, point, estimator, **tols)
        amp = abs(r.amplitude) if r.amplitude is not None else math.sqrt(max(r.probability, 0.0))
        return (r.probability, amp, bool(r.valid), r.error_estimate), None
    except (NatransError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return (math.nan, math.nan, False, math.nan), f"{estimator} at {point}: {exc}"


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("NATRANS_THREADS")
    if env:
        return max(1, int(env))
    if requested:
        return max(1, int(requested))
    return max(1, min(4, os.cpu_count() or 1))


def run_sweep(model: str, axes: dict, estimators, tols: dict | None = None,
              workers: int | None = None) -> tuple[SweepTable, list[str]]:
    """Evaluate every estimator at every grid point.

    Results are gathered in grid order whatever the completion order; a
    point that fails records NaN with ``valid = 0`` instead of aborting.
    """
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    names = MODELS[model]
    unknown = set(axes) - set(names)
    if unknown:
        raise ValueError(f"unknown parameters for {model}: {sorted(unknown)}")
    full = {n: axes[n] if n in axes else [DEFAULTS[n]] for n in names if n in axes or n in DEFAULTS}
    missing = [n for n in names if n not in full]
    if missing:
        raise ValueError(f"missing parameters for {model}: {missing}")
    ests = [e for e in ESTIMATORS if e in set(estimators)]
    bad = set(estimators) - set(ESTIMATORS)
    if bad or not ests:
        raise ValueError(f"unknown or empty estimator list: {sorted(bad) or 'empty'}")
    na = set(ests) - SUPPORTED[model]
    if na:
        raise ValueError(f"estimators {sorted(na)} are not available for model {model!r}")
    table = SweepTable(model, {n: [float(v) for v in full[n]] for n in names}, tuple(ests))
    for pt in table.points():
        make_params(model, pt)
    jobs = [(model, pt, e, tols or {}) for pt in table.points() for e in ests]
    n = worker_count(workers)
    if n == 1 or len(jobs) == 1:
        results = [_cell(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    errors = [msg for _, msg in results if msg]
    cells = iter(results)
    for pt in table.points():
        row = dict(pt)
        for e in ests:
            values, _ = next(cells)
            row.update({f"{e}_{f}": v for f, v in zip(FIELDS, values)})
        table.rows.append(row)
    table.failures = len(errors)
    return table, errors


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return "%.17g" % v


def format_csv(table: SweepTable) -> str:
    cols = table.columns
    lines = [",".join(cols)]
    lines += [",".join(_fmt(row[c]) for c in cols) for row in table.rows]
    return "\n".join(lines) + "\n"


def emit_figure_data(table: SweepTable, path) -> None:
    """Write the table as CSV: 17 significant digits, LF endings, header first."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_csv(table))
