"""Cost model for primal vs dual coordinate descent.

Quantities, for a ``d x n`` matrix ``X``, regularization ``lam`` and
smoothness ``beta``:

* ESO vectors ``u_i = ||X[i, :]||^2`` and ``v_j = ||X[:, j]||^2``.
* Iteration factor ``max_i (beta u_i + lam n) / (p_i lam n)``; multiplied by
  ``log(conv_const / eps)`` it is the iteration bound.
* Iteration cost ``sum_i p_i ||X[i, :]||_0``.
* Total complexity: factor times cost (log term dropped).
* Structural costs ``C_P = sum_i ||X[i,:]||_0 ||X[i,:]||^2`` and the column
  analogue ``C_D``.

The name ``conv_const`` is used for the constant inside the logarithm so it
is not confused with the structural cost ``C_P``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import sampling as sampling_mod
from .errors import (
    BadEpsilon,
    BoundViolated,
    DimensionMismatch,
    InfeasibleAlpha,
    TooLarge,
    ZeroRowOrColumn,
)
from .matrix import stats

PRIMAL = "primal"
DUAL = "dual"
SIDES = (PRIMAL, DUAL)

TIE_TOL = 0.01


def _side(side):
    side = str(side).lower()
    if side not in SIDES:
        raise ValueError(f"side must be 'primal' or 'dual', got {side!r}")
    return side


def _side_data(side, X):
    """``(sqnorms, nnz counts)`` of the coordinates updated on ``side``."""
    st = stats(X)
    if _side(side) == PRIMAL:
        return st.row_sqnorm, st.row_nnz
    return st.col_sqnorm, st.col_nnz


def eso_serial(X):
    """Serial-sampling ESO vectors ``(u, v)``: squared row and column norms."""
    st = stats(X)
    return st.row_sqnorm, st.col_sqnorm


def importance_sampling(side, X, lam, beta):
    sq, _ = _side_data(side, X)
    return sampling_mod.importance(sampling_mod.importance_weights(sq, lam, X.n, beta))


def _probs(side, X, sampling):
    sq, counts = _side_data(side, X)
    p = sampling.probs if hasattr(sampling, "probs") else np.asarray(sampling, dtype=float)
    if p.shape != sq.shape:
        raise DimensionMismatch(
            f"{side} sampling needs {sq.size} probabilities, got {p.size}"
        )
    return sq, counts, p


def iteration_factor(side, X, lam, beta, sampling):
    """``max_i (beta u_i + lam n) / (p_i lam n)``, the iteration bound without its log."""
    sq, _, p = _probs(side, X, sampling)
    lam_n = lam * X.n
    return float(np.max((beta * sq + lam_n) / (p * lam_n)))


def iteration_bound(side, X, lam, beta, sampling, eps, conv_const):
    """Iterations after which expected primal suboptimality is at most ``eps``.

    Raises:
      BadEpsilon: unless ``0 < eps <= conv_const``.
    """
    if not (0 < eps <= conv_const):
        raise BadEpsilon(f"need 0 < eps <= conv_const, got eps={eps}, conv_const={conv_const}")
    return iteration_factor(side, X, lam, beta, sampling) * math.log(conv_const / eps)


def iteration_cost(side, X, sampling):
    """Expected nonzeros visited per iteration."""
    _, counts, p = _probs(side, X, sampling)
    return float(np.dot(p, counts))


def total_complexity(side, X, lam, beta, sampling=None):
    """Iteration factor times iteration cost; importance sampling by default."""
    if sampling is None:
        sampling = importance_sampling(side, X, lam, beta)
    return iteration_factor(side, X, lam, beta, sampling) * iteration_cost(side, X, sampling)


def total_complexity_importance(side, X, lam, beta):
    """Closed form under importance sampling: ``||X||_0 + beta C / (lam n)``."""
    c = cost_cp(X) if _side(side) == PRIMAL else cost_cd(X)
    return X.nnz + beta * float(c) / (lam * X.n)


def total_complexity_uniform(side, X, lam, beta):
    """Closed form under uniform sampling: ``||X||_0 (1 + beta max_i s_i / (lam n))``."""
    sq, _ = _side_data(side, X)
    return X.nnz * (1.0 + beta * float(np.max(sq)) / (lam * X.n))


def _is_binary(X):
    return bool(np.all(np.abs(X.row_val) == 1.0))


def _cost(counts, sqnorms, binary):
    if binary:
        return sum(int(c) * int(c) for c in counts)
    return math.fsum((counts * sqnorms).tolist())


def cost_cp(X):
    """``sum_i ||X[i, :]||_0 ||X[i, :]||^2``; an exact ``int`` for +-1 matrices."""
    st = stats(X)
    return _cost(st.row_nnz, st.row_sqnorm, _is_binary(X))


def cost_cd(X):
    """``sum_j ||X[:, j]||_0 ||X[:, j]||^2``; an exact ``int`` for +-1 matrices."""
    st = stats(X)
    return _cost(st.col_nnz, st.col_sqnorm, _is_binary(X))


# --- binary extremes -------------------------------------------------------


def _round_down(a, b):
    return b * (a // b)


def _check_alpha(alpha, d, n):
    if not (max(d, n) <= alpha <= d * n):
        raise InfeasibleAlpha(f"alpha={alpha} outside [max(d, n), d n] = [{max(d, n)}, {d * n}]")


def binary_min_cost(alpha, n):
    """Smallest ``sum_j w_j^2`` over ``n`` positive integers summing to ``alpha``.

    This is ``min C_D`` over binary ``d x n`` matrices with ``alpha``
    nonzeros (balanced column counts).
    """
    alpha, n = int(alpha), int(n)
    ab = _round_down(alpha, n)
    num = ab * ab + (alpha - ab) * (2 * ab + n)
    assert num % n == 0
    return num // n


def binary_max_cost(alpha, d, n):
    """Largest ``sum_j w_j^2`` over ``n`` integers in ``[1, d]`` summing to ``alpha``.

    This is ``max C_D`` over binary ``d x n`` matrices with no zero rows or
    columns and ``alpha`` nonzeros: full columns, one partial, the rest
    singletons.
    """
    alpha, d, n = int(alpha), int(d), int(n)
    if d == 1:
        return n
    ab = _round_down(alpha - n, d - 1)
    return (d + 1) * ab + n - 1 + (alpha - n + 1 - ab) ** 2


def binary_ratio_bound(alpha, d, n):
    """``max C_P / min C_D`` over binary ``d x n`` matrices with ``alpha`` nonzeros.

    Upper bound on ``C_P / C_D``; ``1 / binary_ratio_bound(alpha, n, d)`` is
    the matching lower bound.  Returned as an exact ``Fraction``.
    """
    return Fraction(binary_max_cost(alpha, n, d), binary_min_cost(alpha, n))


@dataclass(frozen=True)
class BinaryExtremes:
    min_cd: int
    max_cd: int
    min_cp: int
    max_cp: int
    ratio_upper: Fraction  # max C_P / min C_D
    ratio_lower: Fraction  # min C_P / max C_D


def binary_extremes(alpha, d, n):
    """Extremes of ``C_D``/``C_P`` over binary matrices with ``alpha`` nonzeros.

    Raises:
      InfeasibleAlpha: unless ``max(d, n) <= alpha <= d n``.
    """
    _check_alpha(alpha, d, n)
    min_cd = binary_min_cost(alpha, n)
    max_cd = binary_max_cost(alpha, d, n)
    min_cp = binary_min_cost(alpha, d)
    max_cp = binary_max_cost(alpha, n, d)
    return BinaryExtremes(
        min_cd=min_cd, max_cd=max_cd, min_cp=min_cp, max_cp=max_cp,
        ratio_upper=Fraction(max_cp, min_cd), ratio_lower=Fraction(min_cp, max_cd),
    )


MAX_BRUTE_CELLS = 20


def brute_force_binary_extremes(d, n, alpha=None, chunk=1 << 16):
    """Exhaustive extremes of ``C_D``/``C_P`` over 0/1 patterns with no zero row or column.

    Returns a dict ``alpha -> (min_cd, max_cd, min_cp, max_cp)`` or, when
    ``alpha`` is given, that single tuple.

    Raises:
      TooLarge: ``d * n > 20``.
    """
    cells = d * n
    if cells > MAX_BRUTE_CELLS:
        raise TooLarge(f"{d}x{n} has 2^{cells} patterns; limit is 2^{MAX_BRUTE_CELLS}")
    if alpha is not None:
        _check_alpha(alpha, d, n)
    best = {}
    shifts = np.arange(cells, dtype=np.int64)
    for start in range(0, 1 << cells, chunk):
        masks = np.arange(start, min(start + chunk, 1 << cells), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).reshape(-1, d, n)
        rc = bits.sum(axis=2)
        cc = bits.sum(axis=1)
        ok = (rc > 0).all(axis=1) & (cc > 0).all(axis=1)
        if not ok.any():
            continue
        rc, cc = rc[ok], cc[ok]
        a = rc.sum(axis=1)
        cp = (rc * rc).sum(axis=1)
        cd = (cc * cc).sum(axis=1)
        for val in np.unique(a):
            sel = a == val
            cur = (int(cd[sel].min()), int(cd[sel].max()), int(cp[sel].min()), int(cp[sel].max()))
            old = best.get(int(val))
            if old is not None:
                cur = (min(old[0], cur[0]), max(old[1], cur[1]), min(old[2], cur[2]), max(old[3], cur[3]))
            best[int(val)] = cur
    if alpha is not None:
        return best[int(alpha)]
    return dict(sorted(best.items()))


# --- bound checks ----------------------------------------------------------


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    holds: bool

    @property
    def slack(self):
        return float(self.rhs) - float(self.lhs)


@dataclass
class BoundReport:
    checks: list = field(default_factory=list)
    binary: bool = False
    ratio: float = float("nan")

    @property
    def ok(self):
        return all(c.holds for c in self.checks)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def names(self):
        return [c.name for c in self.checks]


def _le(name, lhs, rhs, rtol=1e-12):
    exact = all(isinstance(x, (int, Fraction)) for x in (lhs, rhs))
    holds = lhs <= rhs if exact else float(lhs) <= float(rhs) * (1 + rtol) + 1e-300
    return BoundCheck(name, lhs, rhs, bool(holds))


def _require_nonzero_lines(X):
    st = stats(X)
    if np.any(st.row_nnz == 0) or np.any(st.col_nnz == 0):
        raise ZeroRowOrColumn("X has an all-zero row or column")
    return st


def check_theorem_bounds(X, raise_on_violation=True):
    """Check the structural inequalities relating ``C_P``, ``C_D`` and ``||X||_F``.

    Always: ``F <= C_P <= n F``, ``F <= C_D <= d F``, ``1/d <= C_P/C_D <= n``
    with ``F = ||X||_F^2``.  For +-1 matrices additionally the fixed-nnz
    ratio bounds, and ``C_P <= C_D`` when ``d >= n`` and
    ``||X||_0 >= n^2 + 3n`` (and the mirrored statement).

    Raises:
      ZeroRowOrColumn: X has an empty row or column.
      BoundViolated: some inequality fails (with ``raise_on_violation``).
    """
    st = _require_nonzero_lines(X)
    d, n = X.shape
    binary = _is_binary(X)
    cp, cd = cost_cp(X), cost_cd(X)
    if binary:
        frob = X.nnz
        ratio = Fraction(cp, cd)
        inv_d, n_bound = Fraction(1, d), Fraction(n)
    else:
        frob = st.frob_sq
        ratio = cp / cd
        inv_d, n_bound = 1.0 / d, float(n)
    report = BoundReport(binary=binary, ratio=float(ratio))
    report.checks += [
        _le("frob<=cp", frob, cp),
        _le("cp<=n*frob", cp, n * frob),
        _le("frob<=cd", frob, cd),
        _le("cd<=d*frob", cd, d * frob),
        _le("1/d<=ratio", inv_d, ratio),
        _le("ratio<=n", ratio, n_bound),
    ]
    if binary:
        a = X.nnz
        report.checks += [
            _le("binary:1/R(a,n,d)<=ratio", 1 / binary_ratio_bound(a, n, d), ratio),
            _le("binary:ratio<=R(a,d,n)", ratio, binary_ratio_bound(a, d, n)),
        ]
        if d >= n and a >= n * n + 3 * n:
            report.checks.append(_le("binary:cp<=cd", cp, cd))
        if n >= d and a >= d * d + 3 * d:
            report.checks.append(_le("binary:cd<=cp", cd, cp))
    if raise_on_violation and not report.ok:
        bad = [c.name for c in report.checks if not c.holds]
        raise BoundViolated(f"violated: {', '.join(bad)}")
    return report


# --- recommendation --------------------------------------------------------


LOSS_EVAL_NOTE = (
    "primal evaluates phi' once per visited nonzero, dual once per iteration; "
    "for logistic loss this can make primal iterations markedly slower in "
    "wall time (not included in T)"
)


@dataclass
class ComplexityReport:
    d: int
    n: int
    nnz: int
    lam: float
    beta: float
    u: np.ndarray
    v: np.ndarray
    kp: float  # iteration factor (log term dropped)
    kd: float
    wp: float
    wd: float
    tp: float
    td: float
    cp: float
    cd: float
    ratio: float
    recommendation: str
    note: str = LOSS_EVAL_NOTE

    def record(self):
        """Single-line ``key=value`` summary."""
        vals = {
            "d": self.d, "n": self.n, "nnz": self.nnz, "cp": float(self.cp),
            "cd": float(self.cd), "tp": self.tp, "td": self.td,
            "ratio": self.ratio, "rec": self.recommendation,
        }
        return " ".join(f"{k}={_fmt(v)}" for k, v in vals.items())

    def to_json(self):
        out = {k: v for k, v in asdict(self).items() if k not in ("u", "v")}
        out["cp"], out["cd"] = float(self.cp), float(self.cd)
        return json.dumps(out, sort_keys=True)

    def format(self):
        lines = [
            f"matrix            d={self.d}  n={self.n}  nnz={self.nnz}",
            f"lambda, beta      {self.lam:.6g}, {self.beta:.6g}",
            f"C_P, C_D          {float(self.cp):.6g}, {float(self.cd):.6g}",
            f"iteration factor  primal {self.kp:.6g}   dual {self.kd:.6g}",
            f"cost / iteration  primal {self.wp:.6g}   dual {self.wd:.6g}",
            f"total complexity  primal {self.tp:.6g}   dual {self.td:.6g}",
            f"T_P / T_D         {self.ratio:.4g}",
            f"recommendation    {self.recommendation}",
            f"note: {self.note}",
        ]
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


def recommend(X, lam, beta):
    """Compare both methods under importance sampling.

    ``Primal`` if ``T_P < T_D``, ``Dual`` if ``T_D < T_P``; ``Tie`` when they
    differ by at most 1% of the larger.

    Raises:
      ZeroRowOrColumn: X has an empty row or column.
    """
    _require_nonzero_lines(X)
    u, v = eso_serial(X)
    sp = importance_sampling(PRIMAL, X, lam, beta)
    sd = importance_sampling(DUAL, X, lam, beta)
    kp, kd = iteration_factor(PRIMAL, X, lam, beta, sp), iteration_factor(DUAL, X, lam, beta, sd)
    wp, wd = iteration_cost(PRIMAL, X, sp), iteration_cost(DUAL, X, sd)
    tp, td = kp * wp, kd * wd
    if abs(tp - td) <= TIE_TOL * max(tp, td):
        rec = "Tie"
    elif tp < td:
        rec = "Primal"
    else:
        rec = "Dual"
    return ComplexityReport(
        d=X.d, n=X.n, nnz=X.nnz, lam=lam, beta=beta, u=u, v=v,
        kp=kp, kd=kd, wp=wp, wd=wd, tp=tp, td=td,
        cp=cost_cp(X), cd=cost_cd(X), ratio=tp / td, recommendation=rec,
    )


# --- sampling search ---------------------------------------------------------


def _complexity_batch(P, s, counts, lam_n):
    """Total complexity for each row of ``P`` (rows need not be normalized)."""
    return np.max(s / (P * lam_n), axis=1) * (P @ counts)


def optimal_sampling_search(side, X, lam, beta, trials=10_000, seed=0):
    """Search the simplex for a serial sampling with small total complexity.

    Half the budget goes to random Dirichlet points, the rest to a
    multiplicative pattern search started from the best random point.
    Nothing here knows about importance sampling.

    Returns:
      ``(best_p, best_T)``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    sq, counts = _side_data(side, X)
    counts = counts.astype(np.float64)
    s = beta * sq + lam * X.n
    m = s.size
    lam_n = lam * X.n
    rng = sampling_mod.make_rng(seed)
    if m == 1:
        p = np.ones(1)
        return p, float(_complexity_batch(p[None, :], s, counts, lam_n)[0])

    n_random = max(1, trials // 2)
    best_p, best_t = None, np.inf
    done = 0
    while done < n_random:
        k = min(4096, n_random - done)
        conc = rng.choice([0.3, 1.0, 3.0, 10.0], size=(k, 1))
        P = rng.gamma(np.broadcast_to(conc, (k, m)))
        P = np.maximum(P, 1e-300)
        t = _complexity_batch(P, s, counts, lam_n)
        i = int(np.argmin(t))
        if t[i] < best_t:
            best_t, best_p = float(t[i]), P[i] / P[i].sum()
        done += k

    step = 0.5
    budget = trials - done
    eye = np.eye(m)
    while budget > 0 and step > 1e-12:
        cand = np.concatenate([best_p * np.exp(step * eye), best_p * np.exp(-step * eye)])
        cand = cand[: budget]
        budget -= cand.shape[0]
        t = _complexity_batch(cand, s, counts, lam_n)
        i = int(np.argmin(t))
        if t[i] < best_t:
            best_t, best_p = float(t[i]), cand[i] / cand[i].sum()
        else:
            step *= 0.5
    return best_p, best_t


# --- random data -----------------------------------------------------------


@dataclass(frozen=True)
class RandomCostEstimate:
    mean_cp: float
    mean_cd: float
    se_cp: float
    se_cd: float
    formula_cp: float  # d n sigma^2 + d n^2 mu^2
    formula_cd: float  # d n sigma^2 + n d^2 mu^2
    exact_cp: float
    exact_cd: float
    distribution: str
    samples: int


def _sample_entries(rng, shape, mu, sigma, distribution):
    if distribution == "normal":
        return rng.normal(mu, sigma, size=shape)
    if distribution == "two-point":
        # c * Bernoulli(p) with mean mu and variance sigma^2
        if mu <= 0:
            raise ValueError("two-point entries need mu > 0")
        second = sigma**2 + mu**2
        c, p = second / mu, mu**2 / second
        return c * (rng.random(size=shape) < p)
    raise ValueError(f"unknown distribution {distribution!r}")


def random_dense_expectation(d, n, mu, sigma, samples, seed=0, distribution="normal"):
    """Monte-Carlo means of ``C_P`` and ``C_D`` for i.i.d. random entries.

    ``distribution="normal"`` draws dense Gaussian entries; ``"two-point"``
    draws ``c * Bernoulli(p)`` entries with the same mean and variance.
    ``exact_*`` are the true expectations for the chosen distribution:
    ``d n^2 (sigma^2 + mu^2)`` for dense Gaussian entries, and
    ``d n sigma^2 + d n^2 mu^2`` for two-point entries, which is also the
    value reported in ``formula_*``.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = sampling_mod.make_rng(seed)
    cps, cds = np.empty(samples), np.empty(samples)
    for k in range(samples):
        A = _sample_entries(rng, (d, n), mu, sigma, distribution)
        nz = A != 0
        sq = A * A
        cps[k] = np.dot(nz.sum(axis=1), sq.sum(axis=1))
        cds[k] = np.dot(nz.sum(axis=0), sq.sum(axis=0))
    formula_cp = d * n * sigma**2 + d * n * n * mu**2
    formula_cd = d * n * sigma**2 + n * d * d * mu**2
    if distribution == "normal":
        exact_cp = d * n * n * (sigma**2 + mu**2)
        exact_cd = n * d * d * (sigma**2 + mu**2)
    else:
        exact_cp, exact_cd = formula_cp, formula_cd
    se = lambda x: float(x.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return RandomCostEstimate(
        mean_cp=float(cps.mean()), mean_cd=float(cds.mean()),
        se_cp=se(cps), se_cd=se(cds), formula_cp=formula_cp, formula_cd=formula_cd,
        exact_cp=exact_cp, exact_cd=exact_cd, distribution=distribution, samples=samples,
    )

