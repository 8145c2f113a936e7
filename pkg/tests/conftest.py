"""Shared fixtures and small independent oracles (dense numpy, no package code)."""

import itertools

import numpy as np
import pytest

from pdrcd.matrix import DualIndexedSparseMatrix


def dense_costs(A):
    """(C_P, C_D) straight from a dense array."""
    nz = A != 0
    sq = A * A
    return float(nz.sum(1) @ sq.sum(1)), float(nz.sum(0) @ sq.sum(0))


def composition_extremes(alpha, parts, cap):
    """(min, max) of sum w^2 over integer vectors w in [1, cap]^parts summing to alpha."""
    best_lo, best_hi = None, None
    for w in itertools.product(range(1, cap + 1), repeat=parts):
        if sum(w) != alpha:
            continue
        s = sum(x * x for x in w)
        best_lo = s if best_lo is None else min(best_lo, s)
        best_hi = s if best_hi is None else max(best_hi, s)
    return best_lo, best_hi


def random_sparse(d, n, density, seed, binary=False):
    """Random matrix without empty rows or columns, as (dense, matrix)."""
    rng = np.random.default_rng(seed)
    mask = rng.random((d, n)) < density
    for i in range(d):
        if not mask[i].any():
            mask[i, rng.integers(n)] = True
    for j in range(n):
        if not mask[:, j].any():
            mask[rng.integers(d), j] = True
    vals = np.ones((d, n)) if binary else rng.normal(size=(d, n))
    vals[vals == 0] = 1.0
    A = np.where(mask, vals, 0.0)
    return A, DualIndexedSparseMatrix.from_dense(A)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary ----------------------------------------------------

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    detail = dict(report.user_properties).get("detail", "")
    if report.when == "call" or (report.when == "setup" and report.skipped):
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if report.skipped and not detail:
            detail = str(report.longrepr[-1]) if isinstance(report.longrepr, tuple) else ""
        _ACCEPTANCE[name] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda s: int(s.split("_")[2])):
        outcome, detail = _ACCEPTANCE[name]
        num = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {num:>2} {label}: {outcome}  {detail}".rstrip())
