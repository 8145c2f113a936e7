"""Smooth convex losses, their conjugates, and single-coordinate dual updates.

Every method takes an example index ``j`` (int, slice or integer array)
selecting labels, and an argument ``s`` broadcast against it.

Sign convention: with ``w = X @ alpha / (lam * n)`` the optimal pair
satisfies ``alpha_j = -phi_j'(<X[:, j], w>)``.  Both the exact coordinate
maximizer and the fixed-step update below drive ``alpha_j`` toward that
point.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, xlogy

from .errors import UnsupportedLoss


class LossModel:
    """A family ``phi_j(s) = loss(s; y_j)`` sharing one smoothness constant."""

    kind = None
    beta = None
    #: Whether :meth:`dual_coordinate_max` has a closed form.
    has_exact_dual_step = False

    def __init__(self, labels):
        self.labels = np.asarray(labels, dtype=np.float64)
        self.labels.flags.writeable = False
        if self.labels.ndim != 1:
            raise ValueError("labels must be a vector")

    @property
    def n(self):
        return self.labels.size

    def value(self, j, s):
        raise NotImplementedError

    def derivative(self, j, s):
        raise NotImplementedError

    def conjugate(self, j, s):
        raise NotImplementedError

    def dual_coordinate_max(self, j, alpha_j, dot, v_j, lam, n):
        raise UnsupportedLoss(f"{self.kind} has no closed-form dual coordinate step")

    def eta_step(self, j, alpha_j, dot, eta):
        """Fixed-step dual update ``-eta * (phi_j'(dot) + alpha_j)``.

        Zero exactly when ``alpha_j = -phi_j'(dot)``; for ``0 < eta <= 1``
        the new ``alpha_j`` is a convex combination of the old one and
        ``-phi_j'(dot)``, so it stays in the conjugate's domain.  The dual
        solver passes ``eta = theta / q_j`` (see :func:`dual_step_size`).
        """
        return -eta * (self.derivative(j, dot) + alpha_j)

    def primal_objective(self, z, w, lam):
        """``P(w)`` given ``z = X.T @ w``."""
        return float(np.mean(self.value(slice(None), z)) + 0.5 * lam * np.dot(w, w))

    def dual_objective(self, alpha, w, lam):
        """``D(alpha)`` given ``w = X @ alpha / (lam * n)``.

        Uses ``||X alpha||^2 / (2 lam n^2) = lam ||w||^2 / 2``.
        """
        conj = self.conjugate(slice(None), -np.asarray(alpha))
        return float(-0.5 * lam * np.dot(w, w) - np.mean(conj))

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n})"


class SquaredLoss(LossModel):
    """``phi_j(s) = (s - y_j)^2 / 2``."""

    kind = "squared"
    beta = 1.0
    has_exact_dual_step = True

    def value(self, j, s):
        return 0.5 * (s - self.labels[j]) ** 2

    def derivative(self, j, s):
        return s - self.labels[j]

    def conjugate(self, j, s):
        return 0.5 * s**2 + self.labels[j] * s

    def dual_coordinate_max(self, j, alpha_j, dot, v_j, lam, n):
        # maximizer of -phi*(-(a + h)) - h*dot - v h^2 / (2 lam n)
        return (self.labels[j] - dot - alpha_j) / (1.0 + v_j / (lam * n))


class LogisticLoss(LossModel):
    """``phi_j(s) = log(1 + exp(-y_j s))`` with nonzero labels."""

    kind = "logistic"
    beta = 0.25

    def __init__(self, labels):
        super().__init__(labels)
        if np.any(self.labels == 0):
            raise ValueError("logistic loss needs nonzero labels")

    def value(self, j, s):
        return np.logaddexp(0.0, -self.labels[j] * s)

    def derivative(self, j, s):
        y = self.labels[j]
        return -y * expit(-y * s)

    def conjugate(self, j, s):
        """``b log b + (1-b) log(1-b)`` with ``b = -s/y``, ``+inf`` off ``[0, 1]``."""
        b = -np.asarray(s, dtype=np.float64) / self.labels[j]
        inside = (b >= 0.0) & (b <= 1.0)
        bc = np.clip(b, 0.0, 1.0)
        out = xlogy(bc, bc) + xlogy(1.0 - bc, 1.0 - bc)
        out = np.where(inside, out, np.inf)
        return out if out.ndim else float(out)


LOSSES = {"squared": SquaredLoss, "logistic": LogisticLoss}


def make_loss(kind, labels):
    try:
        return LOSSES[kind](labels)
    except KeyError:
        raise ValueError(f"unknown loss {kind!r}; choose from {sorted(LOSSES)}") from None


def dual_step_size(q, v, lam, n, beta):
    """``theta = min_j q_j lam n / (beta v_j + lam n)``, fixed for a whole run.

    Coordinate ``j`` then moves by ``theta / q_j <= lam n / (beta v_j + lam n)``
    of the way to ``-phi_j'``.
    """
    q = np.asarray(q, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    return float(np.min(q * lam * n / (beta * v + lam * n)))
