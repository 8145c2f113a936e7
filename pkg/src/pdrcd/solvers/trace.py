"""Stopping rules and convergence traces shared by both solvers."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

TRACE_COLUMNS = (
    "iter", "nnz_visited", "passes", "primal_obj", "dual_obj", "gap", "loss_evals", "wall_ns",
)


@dataclass
class StoppingRule:
    """When a run ends; whichever criterion fires first wins.

    ``target_subopt`` compares the primal objective against ``reference``.
    ``target_gap`` applies to dual runs only.  Criteria are evaluated every
    ``check_every`` iterations (default ``ceil(max(d, n) / 10)``), or every
    ``check_every_passes`` passes if that is given instead; ``max_iter`` is
    always honoured exactly.
    """

    target_subopt: float | None = None
    reference: float | None = None
    target_gap: float | None = None
    max_passes: float | None = None
    max_iter: int | None = None
    max_time: float | None = None
    check_every: int | None = None
    check_every_passes: float | None = None

    def __post_init__(self):
        if self.target_subopt is not None and self.reference is None:
            raise ValueError("target_subopt needs a reference objective value")
        if all(
            v is None
            for v in (self.target_subopt, self.target_gap, self.max_passes, self.max_iter, self.max_time)
        ):
            raise ValueError("stopping rule never fires; set at least one limit")

    def interval(self, d, n, avg_cost, nnz):
        if self.check_every is not None:
            return max(1, int(self.check_every))
        if self.check_every_passes is not None:
            return max(1, int(round(self.check_every_passes * nnz / max(avg_cost, 1e-300))))
        return max(1, math.ceil(max(d, n) / 10))

    def reason(self, row, elapsed_s):
        """Name of the criterion that fired on ``row``, or None."""
        if self.target_subopt is not None and row["primal_obj"] - self.reference <= self.target_subopt:
            return "target_subopt"
        if self.target_gap is not None and row["gap"] is not None and row["gap"] <= self.target_gap:
            return "target_gap"
        if self.max_iter is not None and row["iter"] >= self.max_iter:
            return "max_iter"
        if self.max_passes is not None and row["passes"] >= self.max_passes:
            return "max_passes"
        if self.max_time is not None and elapsed_s >= self.max_time:
            return "max_time"
        return None


@dataclass
class SolverTrace:
    """Rows of ``TRACE_COLUMNS`` plus run metadata."""

    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    stop_reason: str | None = None

    def append(self, **row):
        self.rows.append({k: row.get(k) for k in TRACE_COLUMNS})
        return self.rows[-1]

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        return np.array([np.nan if r[name] is None else r[name] for r in self.rows], dtype=float)

    @property
    def last(self):
        return self.rows[-1]

    def passes_to(self, reference, target):
        """Passes at the first row with ``primal_obj - reference <= target``, else None."""
        for r in self.rows:
            if r["primal_obj"] - reference <= target:
                return r["passes"]
        return None

    def to_csv(self, dest=None):
        """Write CSV with the exact header; returns text when ``dest`` is None."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in self.rows:
            writer.writerow(["" if r[k] is None else _cell(r[k]) for k in TRACE_COLUMNS])
        text = buf.getvalue()
        if dest is None:
            return text
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)
        meta_path = os.fspath(dest) + ".meta.json"
        with open(meta_path, "w", encoding="utf-8") as fh:
            json.dump({**self.meta, "stop_reason": self.stop_reason}, fh, indent=2, sort_keys=True)
        return None


def _cell(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def read_trace_csv(source):
    """Inverse of :meth:`SolverTrace.to_csv` (rows only)."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
    else:
        text = source.read()
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != TRACE_COLUMNS:
        raise ValueError(f"unexpected trace header {reader.fieldnames}")
    rows = []
    for rec in reader:
        row = {}
        for k in TRACE_COLUMNS:
            v = rec[k]
            if v == "":
                row[k] = None
            elif k in ("iter", "nnz_visited", "loss_evals", "wall_ns"):
                row[k] = int(v)
            else:
                row[k] = float(v)
        rows.append(row)
    return SolverTrace(rows=rows)
