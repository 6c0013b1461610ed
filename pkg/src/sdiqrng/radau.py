"""Gauss-Radau quadrature on [0, 1] with the endpoint t = 1 fixed.

Nodes and weights come from the Golub-Welsch eigenproblem of the Legendre
Jacobi matrix whose last diagonal entry is modified so that 1 is an
eigenvalue.  Entropies are in bits, so ``tau_i = w_i / (t_i ln 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .config import TOL


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if t.shape != w.shape or t.size < 2:
            raise ValueError("need at least two nodes with matching weights")
        if t[-1] != 1.0:
            raise ValueError("last node must be exactly 1")
        if np.any(np.diff(t) <= 0) or t[0] <= 0:
            raise ValueError("nodes must be strictly increasing in (0, 1]")
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        if abs(w.sum() - 1.0) > TOL.scalar:
            raise ValueError(f"weights sum to {w.sum()!r}, not 1")
        object.__setattr__(self, "nodes", t)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.nodes.size

    @property
    def tau(self) -> np.ndarray:
        """``w_i / (t_i ln 2)`` for the m-1 free nodes."""
        return self.weights[:-1] / (self.nodes[:-1] * math.log(2))

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_radau(m: int) -> QuadratureRule:
    if not isinstance(m, (int, np.integer)) or m < 2:
        raise ValueError(f"Gauss-Radau order must be an integer >= 2, got {m!r}")
    if m > 64:
        raise ValueError("orders above 64 are not supported")
    k = np.arange(1, m)
    offdiag = k / np.sqrt(4.0 * k * k - 1.0)          # Legendre on [-1, 1]
    diag = np.zeros(m)
    # last diagonal entry such that x = 1 is an eigenvalue:
    # solve (J_{m-1} - I) delta = b_{m-1}^2 e_{m-1}
    if m > 1:
        jm = np.diag(np.zeros(m - 1)) + np.diag(offdiag[:-1], 1) + np.diag(offdiag[:-1], -1)
        rhs = np.zeros(m - 1)
        rhs[-1] = offdiag[-1] ** 2
        delta = np.linalg.solve(jm - np.eye(m - 1), rhs)
        diag[-1] = 1.0 + delta[-1]
    x, vecs = scipy.linalg.eigh_tridiagonal(diag, offdiag)
    w = 2.0 * vecs[0, :] ** 2
    t = (x + 1.0) / 2.0
    w = w / 2.0
    order = np.argsort(t)
    t, w = t[order], w[order]
    t[-1] = 1.0
    w = w / w.sum()
    return QuadratureRule(t, w)


def c_m(rule: QuadratureRule) -> float:
    """``sum_{i<m} w_i / (t_i ln 2)`` (fixed endpoint excluded)."""
    return float(rule.tau.sum())
