"""Serial samplings over a finite index set with O(1) alias-table draws."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ImproperSampling, NonpositiveWeight, ZeroSize

#: Bit generator used for every run; recorded in trace metadata.
RNG_ALGORITHM = "numpy.random.PCG64"

MIN_PROB = 1e-30


def make_rng(seed):
    """Seeded generator; ``seed`` may also be a ``SeedSequence``."""
    return np.random.Generator(np.random.PCG64(seed))


def spawn_seeds(seed, count):
    """Independent child seeds for parallel runs."""
    return np.random.SeedSequence(seed).spawn(count)


def build_alias_table(probs):
    """Vose's alias method.

    Returns ``(accept, alias)``: draw a cell ``k`` uniformly, keep ``k`` with
    probability ``accept[k]``, otherwise return ``alias[k]``.
    """
    probs = np.asarray(probs, dtype=np.float64)
    m = probs.size
    scaled = probs * m
    accept = np.ones(m)
    alias = np.arange(m)
    small = [i for i in range(m) if scaled[i] < 1.0]
    large = [i for i in range(m) if scaled[i] >= 1.0]
    while small and large:
        s = small.pop()
        g = large.pop()
        accept[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    # leftovers are 1 up to rounding
    for i in small + large:
        accept[i] = 1.0
        alias[i] = i
    return accept, alias


@dataclass(frozen=True)
class SerialSampling:
    """Proper distribution over ``range(m)``; one index per draw."""

    probs: np.ndarray
    accept: np.ndarray = field(repr=False)
    alias: np.ndarray = field(repr=False)
    name: str = "custom"

    @property
    def m(self):
        return self.probs.size

    def draw(self, rng, size=None):
        """One index (``size=None``) or an array of ``size`` i.i.d. indices."""
        k = rng.integers(0, self.m, size=size)
        u = rng.random(size=size)
        if size is None:
            return int(k) if u < self.accept[k] else int(self.alias[k])
        return np.where(u < self.accept[k], k, self.alias[k])

    def table_marginals(self):
        """Exact per-index mass implied by the alias table."""
        m = self.m
        out = self.accept.copy()
        np.add.at(out, self.alias, 1.0 - self.accept)
        return out / m


def custom(probs, name="custom"):
    """Sampling with the given probabilities (renormalized).

    Raises:
      ImproperSampling: some probability is below ``1e-30`` or not finite,
        or the vector does not sum to 1 within ``1e-9``.
    """
    p = np.array(probs, dtype=np.float64).ravel()
    if p.size == 0:
        raise ZeroSize("sampling needs at least one coordinate")
    if not np.all(np.isfinite(p)) or np.any(p < MIN_PROB):
        raise ImproperSampling("every coordinate needs probability >= 1e-30")
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ImproperSampling(f"probabilities sum to {total!r}, not 1")
    p /= total
    p.flags.writeable = False
    accept, alias = build_alias_table(p)
    accept.flags.writeable = False
    alias.flags.writeable = False
    return SerialSampling(p, accept, alias, name)


def uniform(m):
    if m < 1:
        raise ZeroSize("sampling needs at least one coordinate")
    return custom(np.full(m, 1.0 / m), name="uniform")


def importance(s):
    """Probabilities proportional to ``s_i = beta * u_i + lam * n``."""
    s = np.asarray(s, dtype=np.float64).ravel()
    if s.size == 0:
        raise ZeroSize("sampling needs at least one coordinate")
    if not np.all(np.isfinite(s)) or np.any(s <= 0):
        raise NonpositiveWeight("importance weights must be positive and finite")
    return custom(s / s.sum(), name="importance")


def importance_weights(sqnorms, lam, n, beta):
    """``beta * sqnorms + lam * n``; ``sqnorms`` is ``u`` (rows) or ``v`` (columns)."""
    return beta * np.asarray(sqnorms, dtype=np.float64) + lam * n
