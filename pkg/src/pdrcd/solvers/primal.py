"""Primal randomized coordinate descent (serial NSync) for L2-regularized ERM."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionMismatch, ImproperSampling
from ..matrix import stats
from ..sampling import RNG_ALGORITHM, importance, importance_weights, make_rng
from .trace import SolverTrace, StoppingRule


@dataclass
class PrimalState:
    w: np.ndarray
    z: np.ndarray  # X.T @ w, updated incrementally
    nnz_visited: int = 0
    iterations: int = 0
    loss_evals: int = 0


def primal_step(state, i, X, loss, lam, u_i):
    """One coordinate update on ``w_i``; mutates and returns ``state``.

    Only the nonzeros of row ``i`` enter the partial derivative, so the
    charge is ``||X[i, :]||_0`` visited entries.
    """
    n = X.n
    cols, vals = X.row(i)
    grad = np.dot(loss.derivative(cols, state.z[cols]), vals) / n + lam * state.w[i]
    delta = -n / (loss.beta * u_i + lam * n) * grad
    state.w[i] += delta
    state.z[cols] += delta * vals
    k = cols.size
    state.nnz_visited += k
    state.loss_evals += k
    state.iterations += 1
    return state


def _check_inputs(X, loss, sampling, u, size, what):
    if loss.n != X.n:
        raise DimensionMismatch(f"loss has {loss.n} labels but X has {X.n} columns")
    if sampling.m != size:
        raise DimensionMismatch(f"sampling over {sampling.m} {what}, expected {size}")
    if np.any(sampling.probs <= 0):
        raise ImproperSampling("sampling must give every coordinate positive probability")
    if u.shape != (size,):
        raise DimensionMismatch(f"ESO vector has shape {u.shape}, expected ({size},)")


def solve_primal(X, loss, lam, sampling=None, u=None, stop=None, w0=None, seed=0):
    """Run primal RCD until ``stop`` fires.

    Args:
      X: data matrix, ``d x n``.
      loss: a :class:`~pdrcd.losses.LossModel` with ``n`` labels.
      lam: regularization strength.
      sampling: serial sampling over rows; importance sampling by default.
      u: ESO parameters; defaults to the squared row norms. Larger values
        are allowed (safe but slower), smaller ones are rejected.
      stop: :class:`StoppingRule`; defaults to 100 passes.
      w0: starting point, zero by default.
      seed: RNG seed or ``SeedSequence``.

    Returns:
      ``(w, trace)``.  Each iteration charges ``||X[i, :]||_0`` to
      ``nnz_visited``; the z update touches the same entries again, which
      ``trace.meta['memory_traffic_factor']`` records as 2.
    """
    st = stats(X)
    if u is None:
        u = st.row_sqnorm
    u = np.asarray(u, dtype=np.float64)
    if sampling is None:
        sampling = importance(importance_weights(u, lam, X.n, loss.beta))
    _check_inputs(X, loss, sampling, u, X.d, "rows")
    if np.any(u < st.row_sqnorm * (1 - 1e-12)):
        raise ValueError("u must be at least the squared row norms")
    if stop is None:
        stop = StoppingRule(max_passes=100)
    if stop.target_gap is not None:
        raise ValueError("primal runs track no duality gap; use target_subopt")

    w = np.zeros(X.d) if w0 is None else np.array(w0, dtype=np.float64)
    if w.shape != (X.d,):
        raise DimensionMismatch(f"w0 has shape {w.shape}, expected ({X.d},)")
    state = PrimalState(w=w, z=X.rmatvec(w))
    rng = make_rng(seed)
    nnz = max(X.nnz, 1)
    avg_cost = float(np.dot(sampling.probs, st.row_nnz))
    interval = stop.interval(X.d, X.n, avg_cost, nnz)

    trace = SolverTrace(meta={
        "side": "primal", "loss": loss.kind, "beta": loss.beta, "lambda": lam,
        "sampling": sampling.name, "rng": RNG_ALGORITHM, "seed": str(seed),
        "d": X.d, "n": X.n, "nnz": X.nnz, "check_every": interval,
        "memory_traffic_factor": 2,
    })
    t0 = time.perf_counter_ns()

    def record():
        z_exact = X.rmatvec(state.w)
        row = trace.append(
            iter=state.iterations, nnz_visited=state.nnz_visited,
            passes=state.nnz_visited / nnz,
            primal_obj=loss.primal_objective(z_exact, state.w, lam),
            loss_evals=state.loss_evals, wall_ns=time.perf_counter_ns() - t0,
        )
        return stop.reason(row, (time.perf_counter_ns() - t0) * 1e-9)

    reason = record()
    while reason is None:
        batch = interval
        if stop.max_iter is not None:
            batch = min(batch, stop.max_iter - state.iterations)
        for i in sampling.draw(rng, batch):
            primal_step(state, i, X, loss, lam, u[i])
        reason = record()
    trace.stop_reason = reason
    return state.w, trace
