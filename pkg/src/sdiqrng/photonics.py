"""Time-bin coherent-state source and threshold-detector event model.

Early/late bins carry coherent amplitudes ``(mu_early, mu_late)``.  A bin with
amplitude ``mu`` stays dark with probability ``Q(mu) = (1 - p_dc) exp(-eta mu^2)``
(independent bins).  Outcomes: 0 = early click only, 1 = late click only,
2 = no click; double clicks go to ``b`` with probability ``g_b``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qstates import OverlapBounds
from .stats import ConditionalStats


@dataclass(frozen=True)
class SourceConfig:
    alpha: float = 0.4
    beta0: float = 0.66
    beta1: float = 0.66
    priors: tuple = (0.25, 0.25, 0.5)

    def __post_init__(self):
        if min(self.alpha, self.beta0, self.beta1) < 0:
            raise ValueError("amplitudes must be nonnegative")
        if len(self.priors) != 3 or min(self.priors) <= 0 or abs(sum(self.priors) - 1) > 1e-12:
            raise ValueError(f"priors must be three positive numbers summing to 1, got {self.priors}")

    def bin_amplitudes(self, x: int) -> tuple:
        return [(self.alpha, 0.0), (0.0, self.alpha), (self.beta0, self.beta1)][x]


@dataclass(frozen=True)
class DetectorConfig:
    eta: float = 0.94
    p_dc: float = 1e-6
    g: tuple = (0.5, 0.5, 0.0)

    def __post_init__(self):
        if not (0 <= self.eta <= 1 and 0 <= self.p_dc <= 1):
            raise ValueError("eta and p_dc must lie in [0, 1]")
        if len(self.g) != 3 or min(self.g) < 0 or abs(sum(self.g) - 1) > 1e-12:
            raise ValueError(f"double-click weights must be a distribution, got {self.g}")

    @classmethod
    def ideal(cls) -> "DetectorConfig":
        return cls(eta=1.0, p_dc=0.0)


def no_click(mu: float, det: DetectorConfig) -> float:
    return (1.0 - det.p_dc) * math.exp(-det.eta * mu * mu)


def overlaps_from_amplitudes(src: SourceConfig) -> OverlapBounds:
    """Source-side overlaps of ``|a0>``, ``|0a>`` and ``|b0 b1>`` (real amplitudes)."""
    a, b0, b1 = src.alpha, src.beta0, src.beta1
    d01 = math.exp(-a * a)
    d02 = math.exp(-((a - b0) ** 2) / 2) * math.exp(-b1 * b1 / 2)
    d12 = math.exp(-b0 * b0 / 2) * math.exp(-((a - b1) ** 2) / 2)
    return OverlapBounds(d01, d02, d12)


def event_column(mu_early: float, mu_late: float, det: DetectorConfig) -> np.ndarray:
    q0, q1 = no_click(mu_early, det), no_click(mu_late, det)
    both = (1 - q0) * (1 - q1)
    g0, g1, g2 = det.g
    return np.array([
        (1 - q0) * q1 + g0 * both,
        q0 * (1 - q1) + g1 * both,
        q0 * q1 + g2 * both,
    ])


def event_probabilities(src: SourceConfig, det: DetectorConfig) -> ConditionalStats:
    cols = [event_column(*src.bin_amplitudes(x), det) for x in range(3)]
    return ConditionalStats(np.column_stack(cols))


def misc_error_probability(stats: ConditionalStats, priors=(0.25, 0.25)) -> float:
    """``p0 p(1|0) + p1 p(0|1)``: misidentification of the two test states."""
    p0, p1 = priors[0], priors[1]
    return float(p0 * stats.probs[1, 0] + p1 * stats.probs[0, 1])
