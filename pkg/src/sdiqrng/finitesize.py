"""Finite-size rates: i.i.d. (quantum AEP) and non-i.i.d. (generalised EAT).

Both corrections take a single-round entropy in bits and return a
per-round smooth min-entropy rate, floored at zero.  Logarithms are base 2
except where a natural log is written explicitly (``ln2`` factors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np

ALPHA_GRID = (1.0 + np.logspace(-6, math.log10(0.5), 200)).tolist()

EXTRACTOR_NOTE = ("extractor penalty is 2*log2(1/epsilon_ext) bits in total "
                  "(about 53.15 bits for 1e-8), not 26 bits")


@dataclass(frozen=True)
class FiniteSizeParams:
    n_rounds: float
    epsilon: float = 1e-8
    epsilon_ext: float = 1e-8
    n_b: int = 3
    pr_omega: float = 0.5
    alpha_renyi: Optional[float] = None   # None: optimise on ALPHA_GRID

    def __post_init__(self):
        if not self.n_rounds >= 1:
            raise ValueError(f"N must be >= 1, got {self.n_rounds}")
        for name in ("epsilon", "epsilon_ext"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not 0 < self.pr_omega <= 1:
            raise ValueError(f"Pr[Omega] must lie in (0, 1], got {self.pr_omega}")
        if self.alpha_renyi is not None and not 1 < self.alpha_renyi < 2:
            raise ValueError(f"Renyi alpha must lie in (1, 2), got {self.alpha_renyi}")
        if self.n_b < 2:
            raise ValueError("need at least two outcomes")

    def with_rounds(self, n_rounds: float) -> "FiniteSizeParams":
        return FiniteSizeParams(n_rounds, self.epsilon, self.epsilon_ext, self.n_b,
                                self.pr_omega, self.alpha_renyi)


@dataclass(frozen=True)
class TradeoffFunction:
    """Summary statistics of the trade-off function entering the EAT bound."""

    value: float
    max_f: float
    min_f: float
    var_f: float = 0.0

    def __post_init__(self):
        if not self.min_f - 1e-12 <= self.value <= self.max_f + 1e-12:
            raise ValueError("trade-off value must lie in [Min f, Max f]")
        if self.var_f < 0:
            raise ValueError("variance must be nonnegative")

    @classmethod
    def constant(cls, s_star: float) -> "TradeoffFunction":
        return cls(s_star, s_star, s_star, 0.0)


def max_entropy(probs_x2: Sequence[float]) -> float:
    """``2 log2 sum_b sqrt(p(b|2))`` for the diagonal outcome state."""
    p = np.clip(np.asarray(probs_x2, dtype=float), 0.0, None)
    return 2.0 * math.log2(float(np.sum(np.sqrt(p))))


def aep_eta(hmin: float, hmax: float) -> float:
    return math.sqrt(2.0 ** -hmin) + math.sqrt(2.0 ** hmax) + 1.0


def aep_delta(epsilon: float, eta: float) -> float:
    return 4.0 * math.log2(eta) * math.sqrt(math.log2(2.0 / epsilon**2))


def aep_rate(s_star: float, probs_x2: Sequence[float], params: FiniteSizeParams,
             hmin_single: float) -> float:
    """``S* - delta / sqrt(N)`` floored at 0."""
    if s_star < 0:
        raise ValueError("entropy bound must be nonnegative")
    eta = aep_eta(hmin_single, max_entropy(probs_x2))
    return max(0.0, s_star - aep_delta(params.epsilon, eta) / math.sqrt(params.n_rounds))


def g_smoothing(epsilon: float) -> float:
    """``-log2(1 - sqrt(1 - eps^2))``, written to avoid cancellation."""
    return -math.log2(epsilon**2 / (1.0 + math.sqrt(1.0 - epsilon**2)))


def eat_v(f: TradeoffFunction, n_b: int) -> float:
    return math.log2(2 * n_b**2 + 1) + math.sqrt(2.0 + f.var_f)


def eat_k_prime(alpha: float, f: TradeoffFunction, n_b: int) -> float:
    if alpha >= 1.5:
        return math.inf             # K' has a pole at alpha = 3/2
    spread = 2.0 * math.log2(n_b) + f.max_f - f.min_f
    r = (alpha - 1.0) / (2.0 - alpha)
    pre = (2.0 - alpha) ** 3 / (6.0 * (3.0 - 2.0 * alpha) ** 3 * math.log(2.0))
    return pre * 2.0 ** (r * spread) * math.log(2.0**spread + math.e**2) ** 3


def eat_correction(alpha: float, f: TradeoffFunction, params: FiniteSizeParams) -> float:
    """Total second-order penalty at a fixed Renyi parameter."""
    r = (alpha - 1.0) / (2.0 - alpha)
    v = eat_v(f, params.n_b)
    finite = (g_smoothing(params.epsilon) + alpha * math.log2(1.0 / params.pr_omega)) \
        / (params.n_rounds * (alpha - 1.0))
    return r * math.log(2.0) / 2.0 * v**2 + finite + r**2 * eat_k_prime(alpha, f, params.n_b)


def best_alpha(f: TradeoffFunction, params: FiniteSizeParams) -> float:
    if params.alpha_renyi is not None:
        return params.alpha_renyi
    costs = [eat_correction(a, f, params) for a in ALPHA_GRID]
    return ALPHA_GRID[int(np.argmin(costs))]


def eat_rate(f: TradeoffFunction, params: FiniteSizeParams) -> float:
    alpha = best_alpha(f, params)
    return max(0.0, f.value - eat_correction(alpha, f, params))


@dataclass(frozen=True)
class Extraction:
    bits: float
    per_round: float
    epsilon_total: float
    note: str = EXTRACTOR_NOTE


def extractable_bits(h_total: float, params: FiniteSizeParams) -> Extraction:
    """Output length ``max(0, h - 2 log2(1/eps_EXT))`` and total error ``eps_EXT + 4 eps``."""
    if h_total < 0:
        raise ValueError("total entropy must be nonnegative")
    bits = max(0.0, h_total - 2.0 * math.log2(1.0 / params.epsilon_ext))
    return Extraction(bits, bits / params.n_rounds, params.epsilon_ext + 4.0 * params.epsilon)


@dataclass
class SweepRow:
    n_rounds: float
    hmin_raw: float
    aep: float
    eat: float
    extractable: float

    def as_dict(self) -> Dict[str, float]:
        return {"N": self.n_rounds, "hmin_raw": self.hmin_raw, "aep": self.aep,
                "eat": self.eat, "extractable": self.extractable}


SWEEP_COLUMNS = ("N", "hmin_raw", "aep", "eat", "extractable")


def rate_table(s_star: float, hmin: float, probs_x2: Sequence[float],
               n_list: Sequence[float], params: FiniteSizeParams) -> List[SweepRow]:
    """Rates for each round count; extraction is applied to the EAT rate."""
    f = TradeoffFunction.constant(s_star)
    rows = []
    for n in sorted(n_list):
        p = params.with_rounds(n)
        eat = eat_rate(f, p)
        rows.append(SweepRow(float(n), hmin, aep_rate(s_star, probs_x2, p, hmin), eat,
                             extractable_bits(eat * n, p).per_round))
    return rows


def rate_sweep(stats, ensemble, n_list: Sequence[float], params: FiniteSizeParams, *,
               dim: int = 3, rule=None, seesaw_opts=None) -> List[SweepRow]:
    """Certify ``stats`` once, then tabulate finite-size rates over ``n_list``."""
    from .guessing import guessing_probability
    from .seesaw import shannon_bound

    guess = guessing_probability(stats, ensemble, dim)
    bound = shannon_bound(stats, ensemble, rule, dim, seesaw_opts)
    return rate_table(bound.s_star, guess.min_entropy, stats.column(2), n_list, params)
