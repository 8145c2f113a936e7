"""Synthetic data matrices: random, structural extremes, and worst cases.

Binary generators emit +1 entries only; signs change neither nonzero
counts nor squared norms.  Every generator is deterministic in its
arguments and ``seed``.
"""

from __future__ import annotations

import numpy as np

from .analyzer import binary_max_cost, binary_min_cost, cost_cd, cost_cp
from .errors import CannotAvoidZeroRow, InfeasibleAlpha
from .matrix import DualIndexedSparseMatrix
from .sampling import make_rng


def gen_random(d, n, mu=0.0, sigma=1.0, density=1.0, seed=0):
    """Entries i.i.d. ``normal(mu, sigma^2)`` on a ``Bernoulli(density)`` pattern.

    Empty rows and columns left by a sparse pattern get one extra entry
    each; ``X.meta['repairs']`` counts them.
    """
    if not (0.0 < density <= 1.0):
        raise ValueError(f"density must be in (0, 1], got {density}")
    if mu == 0.0 and sigma == 0.0:
        raise ValueError("mu = sigma = 0 gives an all-zero matrix")
    rng = make_rng(seed)
    mask = np.ones((d, n), dtype=bool) if density == 1.0 else rng.random((d, n)) < density
    repairs = 0
    for i in np.flatnonzero(~mask.any(axis=1)):
        mask[i, rng.integers(n)] = True
        repairs += 1
    for j in np.flatnonzero(~mask.any(axis=0)):
        mask[rng.integers(d), j] = True
        repairs += 1
    r, c = np.nonzero(mask)
    vals = rng.normal(mu, sigma, size=r.size)
    # an exact zero draw would be rejected by the matrix type
    while np.any(vals == 0.0):
        z = vals == 0.0
        vals[z] = rng.normal(mu, sigma, size=int(z.sum())) if sigma > 0 else mu
    return DualIndexedSparseMatrix.from_arrays(
        r, c, vals, d, n,
        meta={"generator": "random", "density": density, "seed": seed, "repairs": repairs},
    )


def gen_ones(d, n):
    r, c = np.divmod(np.arange(d * n), n)
    return DualIndexedSparseMatrix.from_arrays(
        r, c, np.ones(d * n), d, n, meta={"generator": "ones"}
    )


def gen_tightness_family(d, n, a, b, c):
    """First column ``a`` below the corner, first row ``b`` right of it, corner ``c``.

    ``C_P = (d-1) a^2 + n(n-1) b^2 + n c^2`` and
    ``C_D = d(d-1) a^2 + (n-1) b^2 + d c^2``.
    """
    if a == 0 or b == 0 or c == 0:
        raise ValueError("a, b and c must be nonzero")
    rows = [0] + [i for i in range(1, d)] + [0] * (n - 1)
    cols = [0] + [0] * (d - 1) + [j for j in range(1, n)]
    vals = [c] + [a] * (d - 1) + [b] * (n - 1)
    return DualIndexedSparseMatrix.from_arrays(
        rows, cols, vals, d, n, meta={"generator": "tightness", "abc": (a, b, c)}
    )


def _check_alpha(alpha, d, n):
    if not (max(d, n) <= alpha <= d * n):
        if alpha < d and n <= alpha <= d * n:
            raise CannotAvoidZeroRow(f"alpha={alpha} < d={d} leaves a zero row")
        raise InfeasibleAlpha(f"alpha={alpha} outside [max(d, n), d n] = [{max(d, n)}, {d * n}]")


def balanced_counts(total, parts):
    """``parts`` integers differing by at most one, summing to ``total``."""
    q, r = divmod(total, parts)
    return np.array([q + 1] * r + [q] * (parts - r), dtype=np.int64)


def skewed_counts(alpha, d, n):
    """Column counts maximizing ``sum w_j^2``: full columns, one partial, singletons."""
    if alpha == d * n:
        return np.full(n, d, dtype=np.int64)
    if d == 1:
        return np.ones(n, dtype=np.int64)
    full, rem = divmod(alpha - n, d - 1)
    partial = rem + 1
    counts = [d] * full + [partial] + [1] * (n - full - 1)
    return np.array(counts, dtype=np.int64)


def fill_margins(row_counts, col_counts):
    """0/1 pattern with the given row and column sums, or None if none exists.

    Columns are processed from largest to smallest, each taking the rows with
    the most remaining demand (ties by index).  This greedy succeeds
    whenever the margins are realizable.
    """
    row_left = np.array(row_counts, dtype=np.int64)
    d = row_left.size
    rows, cols = [], []
    for j in np.argsort(-np.asarray(col_counts), kind="stable"):
        k = int(col_counts[j])
        if k > d:
            return None
        pick = np.lexsort((np.arange(d), -row_left))[:k]
        if k and row_left[pick[-1]] <= 0:
            return None
        row_left[pick] -= 1
        rows.extend(pick.tolist())
        cols.extend([int(j)] * k)
    if np.any(row_left != 0):
        return None
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)


def _permute(rows, cols, d, n, seed):
    rng = make_rng(seed)
    return rng.permutation(d)[rows], rng.permutation(n)[cols]


def _binary(rows, cols, d, n, seed, meta):
    if seed is not None:
        rows, cols = _permute(rows, cols, d, n, seed)
    return DualIndexedSparseMatrix.from_arrays(rows, cols, np.ones(rows.size), d, n, meta=meta)


def gen_binary_balanced_columns(d, n, alpha, seed=0):
    """Binary matrix with column counts differing by at most one (minimal ``C_D``).

    Column entries are laid out cyclically over the rows, so row counts are
    balanced too and no row is empty.
    """
    _check_alpha(alpha, d, n)
    counts = balanced_counts(alpha, n)
    rows = np.arange(alpha) % d
    cols = np.repeat(np.arange(n), counts)
    X = _binary(rows, cols, d, n, seed, {"generator": "balanced", "alpha": alpha, "seed": seed})
    if cost_cd(X) != binary_min_cost(alpha, n):
        raise AssertionError("balanced generator missed the minimal C_D")
    return X


def gen_binary_skewed_columns(d, n, alpha, seed=0):
    """Binary matrix with extremal column counts (maximal ``C_D``), no empty row."""
    _check_alpha(alpha, d, n)
    X = _worst(d, n, alpha, seed, "skewed")
    if cost_cd(X) != binary_max_cost(alpha, d, n):
        raise AssertionError("skewed generator missed the maximal C_D")
    return X


def gen_worst_for_dual(d, n, alpha, seed=0):
    """Binary matrix with maximal ``C_D`` and minimal ``C_P`` at the same time.

    Row counts are balanced and column counts extremal; the two margins are
    always jointly realizable for feasible ``alpha``.  ``X.meta['exact']``
    records whether both extremes were reached.
    """
    _check_alpha(alpha, d, n)
    return _worst(d, n, alpha, seed, "worst-dual")


def _worst(d, n, alpha, seed, name):
    row_counts = balanced_counts(alpha, d)
    col_counts = skewed_counts(alpha, d, n)
    filled = fill_margins(row_counts, col_counts)
    exact = filled is not None
    if not exact:
        # fallback: keep the column extremes, spread rows as evenly as the greedy allows
        filled = _greedy_columns(d, col_counts)
    rows, cols = filled
    X = _binary(rows, cols, d, n, seed, {"generator": name, "alpha": alpha, "seed": seed})
    exact = exact and cost_cp(X) == binary_min_cost(alpha, d) and cost_cd(X) == binary_max_cost(alpha, d, n)
    return X.with_meta(exact=exact)


def _greedy_columns(d, col_counts):
    load = np.zeros(d, dtype=np.int64)
    rows, cols = [], []
    for j, k in enumerate(col_counts):
        pick = np.lexsort((np.arange(d), load))[: int(k)]
        load[pick] += 1
        rows.extend(pick.tolist())
        cols.extend([j] * int(k))
    return np.array(rows), np.array(cols)


def with_random_signs(X, seed=0):
    """Flip each entry's sign independently; costs are unchanged."""
    rng = make_rng(seed)
    r, c, v = X.triples()
    v = v * rng.choice([-1.0, 1.0], size=v.size)
    return DualIndexedSparseMatrix.from_arrays(r, c, v, X.d, X.n, meta={**X.meta, "signs": "random"})


def alternating_labels(n):
    """``+1, -1, +1, ...`` by column index."""
    return np.where(np.arange(n) % 2 == 0, 1.0, -1.0)


def random_labels(n, seed=0):
    return make_rng(seed).choice([-1.0, 1.0], size=n)


# --- generator spec mini-language -----------------------------------------

GENERATOR_HELP = """\
generator spec: KIND:DxN[:key=value]...
  ones:DxN                          all-ones matrix
  random:DxN[:mu=0][:sigma=1][:density=1]
  tightness:DxN[:a=1][:b=1][:c=1]
  balanced:DxN:a=ALPHA | :nnz=P%    binary, balanced column counts
  skewed:DxN:a=ALPHA | :nnz=P%      binary, extremal column counts
  worst-dual:DxN:a=ALPHA | :nnz=P%  binary, max C_D with min C_P
nnz=P% means round(P/100 * D * N) nonzeros, raised to max(D, N) if needed."""


def _alpha_from(params, d, n):
    if "a" in params or "alpha" in params:
        return int(params.get("a", params.get("alpha")))
    if "nnz" in params:
        txt = params["nnz"].rstrip("%")
        alpha = int(round(float(txt) / 100.0 * d * n))
        return max(alpha, d, n)
    raise ValueError("binary generators need a=ALPHA or nnz=P%")


def parse_generator_spec(spec):
    """Split ``KIND:DxN[:k=v]...`` into ``(kind, d, n, params)``."""
    parts = spec.split(":")
    if len(parts) < 2:
        raise ValueError(f"bad generator spec {spec!r}\n{GENERATOR_HELP}")
    kind = parts[0]
    try:
        d_txt, n_txt = parts[1].lower().split("x")
        d, n = int(d_txt), int(n_txt)
    except ValueError:
        raise ValueError(f"bad shape {parts[1]!r} in {spec!r}") from None
    params = {}
    for kv in parts[2:]:
        k, sep, v = kv.partition("=")
        if not sep:
            raise ValueError(f"bad parameter {kv!r} in {spec!r}")
        params[k] = v
    return kind, d, n, params


def from_spec(spec, seed=0):
    """Generate a matrix from a spec string (see ``GENERATOR_HELP``)."""
    kind, d, n, params = parse_generator_spec(spec)
    if kind == "ones":
        return gen_ones(d, n)
    if kind == "random":
        return gen_random(
            d, n, mu=float(params.get("mu", 0.0)), sigma=float(params.get("sigma", 1.0)),
            density=float(params.get("density", 1.0)), seed=seed,
        )
    if kind == "tightness":
        return gen_tightness_family(
            d, n, float(params.get("a", 1)), float(params.get("b", 1)), float(params.get("c", 1))
        )
    makers = {
        "balanced": gen_binary_balanced_columns,
        "skewed": gen_binary_skewed_columns,
        "worst-dual": gen_worst_for_dual,
    }
    if kind in makers:
        return makers[kind](d, n, _alpha_from(params, d, n), seed=seed)
    raise ValueError(f"unknown generator kind {kind!r}\n{GENERATOR_HELP}")
