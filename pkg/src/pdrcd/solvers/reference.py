"""High-accuracy reference optima, independent of the coordinate methods."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import expit

from ..losses import SquaredLoss


@dataclass(frozen=True)
class Reference:
    w: np.ndarray
    alpha: np.ndarray
    primal: float
    dual: float

    @property
    def gap(self):
        return self.primal - self.dual


def _certify(X, loss, lam, w):
    z = X.rmatvec(w)
    alpha = -loss.derivative(slice(None), z)
    primal = loss.primal_objective(z, w, lam)
    dual = loss.dual_objective(alpha, X.matvec(alpha) / (lam * X.n), lam)
    return Reference(w=w, alpha=alpha, primal=primal, dual=dual)


def ridge_solution(X, y, lam):
    """Solve ``(X X^T + lam n I) w = X y`` through the smaller Gram matrix."""
    A = X.to_dense()
    d, n = A.shape
    y = np.asarray(y, dtype=np.float64)
    if d <= n:
        return linalg.solve(A @ A.T + lam * n * np.eye(d), A @ y, assume_a="pos")
    c = linalg.solve(A.T @ A + lam * n * np.eye(n), y, assume_a="pos")
    return A @ c


def _newton_direction(A, hdiag, lam, n, g):
    """Solve ``(lam I + A diag(h) A^T / n) p = g`` via the smaller system."""
    d, m = A.shape
    B = A * np.sqrt(hdiag / n)
    if d <= m:
        return linalg.solve(B @ B.T + lam * np.eye(d), g, assume_a="pos")
    inner = linalg.solve(B.T @ B + lam * np.eye(m), B.T @ g, assume_a="pos")
    return (g - B @ inner) / lam


def reference_optimum(X, loss, lam, tol=1e-13, max_iter=100):
    """Primal optimum with a duality-gap certificate.

    Squared loss uses the normal equations; other losses use damped Newton
    on the primal with exact Hessians (dense, so intended for
    ``min(d, n)`` up to a few thousand).
    """
    if isinstance(loss, SquaredLoss):
        return _certify(X, loss, lam, ridge_solution(X, loss.labels, lam))
    A = X.to_dense()
    n = X.n
    w = np.zeros(X.d)

    def objective(w):
        return loss.primal_objective(A.T @ w, w, lam)

    f = objective(w)
    for _ in range(max_iter):
        z = A.T @ w
        g = A @ loss.derivative(slice(None), z) / n + lam * w
        # logistic second derivative: y^2 sigma(yz) (1 - sigma(yz))
        s = expit(loss.labels * z)
        hdiag = loss.labels**2 * s * (1.0 - s)
        p = _newton_direction(A, hdiag, lam, n, g)
        decrement = float(g @ p)
        if decrement <= 2 * tol:
            break
        t = 1.0
        while t > 1e-12:
            f_new = objective(w - t * p)
            if f_new <= f - 0.25 * t * decrement:
                break
            t *= 0.5
        w = w - t * p
        f = f_new
    return _certify(X, loss, lam, w)
