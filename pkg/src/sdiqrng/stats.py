"""Conditional outcome statistics ``p(b|x)`` (rows b, columns x)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import TOL


@dataclass(frozen=True)
class ConditionalStats:
    """Column-stochastic 3x3 matrix ``probs[b, x]``.

    ``counts`` is kept when the table came from data; frequencies are plain
    ``n_bx / n_x`` with no smoothing.  ``constrained`` marks which entries the
    certification programs must reproduce (all of them by default).
    """

    probs: np.ndarray
    counts: Optional[np.ndarray] = None
    constrained: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (3, 3):
            raise ValueError(f"expected a 3x3 table p[b, x], got shape {p.shape}")
        if np.any(p < -TOL.scalar):
            raise ValueError("negative probability")
        mask = np.ones((3, 3), bool) if self.constrained is None else np.asarray(self.constrained, bool)
        for x in range(3):
            if mask[:, x].all() and abs(p[:, x].sum() - 1.0) > 1e-9:
                raise ValueError(f"column x={x} sums to {p[:, x].sum()!r}, not 1")
        object.__setattr__(self, "probs", np.clip(p, 0.0, None))
        object.__setattr__(self, "constrained", mask)

    @classmethod
    def from_counts(cls, counts) -> "ConditionalStats":
        n = np.asarray(counts, dtype=float)
        if n.shape != (3, 3) or np.any(n < 0):
            raise ValueError("counts must be a nonnegative 3x3 table n[b, x]")
        nx = n.sum(axis=0)
        if np.any(nx == 0):
            raise ValueError(f"no rounds recorded for input(s) x = {np.flatnonzero(nx == 0).tolist()}")
        return cls(n / nx, counts=np.asarray(counts, dtype=np.int64))

    @classmethod
    def unconstrained(cls) -> "ConditionalStats":
        """Table that constrains nothing (Eve is free)."""
        return cls(np.full((3, 3), 1 / 3), constrained=np.zeros((3, 3), bool))

    def restricted(self, mask) -> "ConditionalStats":
        return ConditionalStats(self.probs, self.counts, np.asarray(mask, bool) & self.constrained)

    @property
    def n_rounds(self) -> Optional[int]:
        return None if self.counts is None else int(self.counts.sum())

    def column(self, x: int) -> np.ndarray:
        return self.probs[:, x]
