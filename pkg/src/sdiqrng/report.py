"""End-to-end certification of one statistics table."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

from .finitesize import (EXTRACTOR_NOTE, FiniteSizeParams, TradeoffFunction, aep_rate,
                         eat_rate, extractable_bits)
from .guessing import guessing_probability
from .qstates import (OverlapBounds, a_lower_bound, qubit_ensemble_from_overlaps,
                      tilde_states)
from .radau import gauss_radau
from .seesaw import SeesawOptions, shannon_bound
from .stats import ConditionalStats


@dataclass
class CertifyOptions:
    dim: int = 3
    m: int = 8
    relax: bool = False
    seesaw: SeesawOptions = field(default_factory=SeesawOptions)


@dataclass
class CertificationReport:
    overlaps: OverlapBounds
    a_bound: Optional[float]
    p_guess: float
    hmin: float
    s_star: float
    aep: float
    eat: float
    extractable_per_round: float
    n_rounds: float
    epsilon_total: float
    diagnostics: Dict[str, object]

    def ordering_ok(self, tol: float = 1e-3) -> Dict[str, bool]:
        return {
            "s_star_ge_hmin": self.s_star >= self.hmin - tol,
            "aep_le_s_star": self.aep <= self.s_star,
            "eat_le_s_star": self.eat <= self.s_star,
        }

    def as_dict(self) -> dict:
        return {
            "overlaps": {"d01": self.overlaps.d01, "d02": self.overlaps.d02,
                         "d12": self.overlaps.d12},
            "a_bound": self.a_bound,
            "p_guess": self.p_guess,
            "hmin": self.hmin,
            "s_star": self.s_star,
            "aep": self.aep,
            "eat": self.eat,
            "extractable_per_round": self.extractable_per_round,
            "n_rounds": self.n_rounds,
            "epsilon_total": self.epsilon_total,
            "checks": self.ordering_ok(),
            "diagnostics": self.diagnostics,
        }


def ensemble_for(overlaps: OverlapBounds, dim: int, priors=(0.25, 0.25, 0.5)):
    if dim == 3:
        return tilde_states(overlaps, priors)
    if dim == 2:
        return qubit_ensemble_from_overlaps(overlaps, priors)
    raise ValueError(f"Eve's dimension must be 2 or 3, got {dim}")


def certify(stats: ConditionalStats, overlaps: OverlapBounds, params: FiniteSizeParams,
            opts: Optional[CertifyOptions] = None, priors=(0.25, 0.25, 0.5)) -> CertificationReport:
    opts = opts or CertifyOptions()
    ensemble = ensemble_for(overlaps, opts.dim, priors)
    guess = guessing_probability(stats, ensemble, opts.dim, relax=opts.relax)
    # the see-saw works on the (possibly relaxed) table the guessing SDP accepted
    bound = shannon_bound(guess.stats, ensemble, gauss_radau(opts.m), opts.dim, opts.seesaw)
    probs_x2 = guess.stats.column(2)
    aep = aep_rate(bound.s_star, probs_x2, params, guess.min_entropy)
    eat = eat_rate(TradeoffFunction.constant(bound.s_star), params)
    ext = extractable_bits(eat * params.n_rounds, params)
    try:
        a = a_lower_bound(overlaps)
    except ValueError:
        a = None
    diag = {
        "duality_gap": guess.duality_gap,
        "relaxed_distance": guess.relaxed_distance,
        "seesaw_restart_values": list(bound.restart_values),
        "seesaw_converged": list(bound.converged),
        "seesaw_iterations": len(bound.trajectory),
        "seesaw_final_delta": bound.state.deltas[-1] if bound.state.deltas else None,
        "descent_violations": bound.descent_violations,
        "restarts": len(bound.restart_values),
        "extractor_note": EXTRACTOR_NOTE,
    }
    return CertificationReport(overlaps, a, guess.p_guess, guess.min_entropy, bound.s_star,
                               aep, eat, ext.per_round, params.n_rounds, ext.epsilon_total,
                               diag)
