"""Eve's guessing probability for the x = 2 outcomes, as an SDP.

Eve holds a classical label lambda and steers the measurement to POVM
``pi^lambda``; after absorbing ``q(lambda)`` into ``M_b^lambda = q pi_b^lambda``
and relabelling so that strategy ``lambda`` guesses ``b = lambda``, the
guessing probability is ``sum_lambda Tr[rho_2 M_lambda^lambda]`` maximised
over PSD ``M`` that reproduce the observed ``p(b|x)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import sdpcore
from .qstates import PreparedEnsemble
from .sdpcore import Block, SdpProblem, SdpSolution
from .stats import ConditionalStats

N_OUTCOMES = 3
INTERIOR_MIX = 1e-6


class InfeasibleStats(ValueError):
    """No strategy on the given ensemble reproduces the statistics."""

    hint = "re-run with the nearest-feasible relaxation enabled (--relax)"


class SolverFailure(RuntimeError):
    pass


def label(lam: int, b: int) -> str:
    return f"M{lam}{b}"


@dataclass
class EveModel:
    """Eve's strategy blocks ``M[lam][b]`` (D x D)."""

    dim: int
    blocks: List[List[np.ndarray]]

    @property
    def n_strategies(self) -> int:
        return len(self.blocks)

    @property
    def weights(self) -> np.ndarray:
        """``q(lambda) = Tr[sum_b M_b^lambda] / D``."""
        return np.array([np.real(np.trace(sum(row))) / self.dim for row in self.blocks])

    def reproduced(self, rhos: List[np.ndarray]) -> np.ndarray:
        nb = len(self.blocks[0])
        return np.array([[sum(np.real(np.trace(row[b] @ r)) for row in self.blocks)
                          for r in rhos] for b in range(nb)])

    def check(self, tol: float = 1e-8) -> Dict[str, float]:
        """Largest violations of PSD-ness, marginal identity and normalisation."""
        eye = np.eye(self.dim)
        psd = max(max(0.0, -np.linalg.eigvalsh(m).min()) for row in self.blocks for m in row)
        marg = max(np.abs(sum(row) - q * eye).max() for row, q in zip(self.blocks, self.weights))
        norm = abs(self.weights.sum() - 1.0)
        return {"psd": psd, "marginal": float(marg), "normalisation": float(norm)}


@dataclass
class GuessingResult:
    p_guess: float
    objective: float
    duality_gap: float
    model: EveModel
    stats: ConditionalStats
    relaxed_distance: float = 0.0
    solution: Optional[SdpSolution] = field(default=None, repr=False)

    @property
    def min_entropy(self) -> float:
        return min_entropy(self.p_guess)


def min_entropy(p_guess: float) -> float:
    if not 0 < p_guess <= 1 + 1e-9:
        raise ValueError(f"guessing probability {p_guess} outside (0, 1]")
    return -math.log2(min(1.0, p_guess))


def _hermitian_basis_functionals(dim: int, complex_: bool) -> List[np.ndarray]:
    """Functionals whose vanishing on ``S`` means ``S`` is proportional to 1."""
    out = []
    dtype = complex if complex_ else float
    for i in range(dim - 1):
        c = -np.eye(dim, dtype=dtype) / dim
        c[i, i] += 1.0
        out.append(c)
    for i in range(dim):
        for j in range(i + 1, dim):
            c = np.zeros((dim, dim), dtype=dtype)
            c[i, j] = c[j, i] = 0.5
            out.append(c)
            if complex_:
                c = np.zeros((dim, dim), dtype=complex)
                c[i, j] = 0.5j
                c[j, i] = -0.5j
                out.append(c)
    return out


def strategy_constraints(dim: int, n_lambda: int, n_b: int, complex_: bool):
    """Marginal-identity and normalisation equalities over the ``M`` blocks."""
    eqs = []
    for lam in range(n_lambda):
        for c in _hermitian_basis_functionals(dim, complex_):
            eqs.append(({label(lam, b): c for b in range(n_b)}, 0.0))
    eye = np.eye(dim) / dim
    eqs.append(({label(lam, b): eye for lam in range(n_lambda) for b in range(n_b)}, 1.0))
    return eqs


def reproduction_constraints(stats: ConditionalStats, rhos, n_lambda: int):
    eqs = []
    for b in range(N_OUTCOMES):
        for x in range(3):
            if stats.constrained[b, x]:
                eqs.append(({label(lam, b): rhos[x] for lam in range(n_lambda)},
                            float(stats.probs[b, x])))
    return eqs


def _setup(ensemble: PreparedEnsemble, dim: int, complex_: Optional[bool]):
    if ensemble.dim > dim:
        raise ValueError(f"ensemble dimension {ensemble.dim} exceeds Eve's dimension {dim}")
    if complex_ is None:
        complex_ = not ensemble.is_real()
    rhos = ensemble.density_matrices(dim)
    if not complex_:
        rhos = [r.real for r in rhos]
    return rhos, complex_


def guessing_problem(stats: ConditionalStats, ensemble: PreparedEnsemble, dim: int = 3,
                     complex_: Optional[bool] = None) -> SdpProblem:
    rhos, complex_ = _setup(ensemble, dim, complex_)
    n = N_OUTCOMES
    blocks = [Block(label(lam, b), dim, complex_) for lam in range(n) for b in range(n)]
    objective = {label(lam, lam): rhos[2] for lam in range(n)}
    eqs = strategy_constraints(dim, n, n, complex_) + reproduction_constraints(stats, rhos, n)
    return SdpProblem(blocks, objective, eqs, "max")


def model_from_solution(sol: SdpSolution, dim: int, n_lambda: int = N_OUTCOMES,
                        n_b: int = N_OUTCOMES) -> EveModel:
    return EveModel(dim, [[sol.blocks[label(lam, b)] for b in range(n_b)]
                          for lam in range(n_lambda)])


def nearest_feasible(stats: ConditionalStats, ensemble: PreparedEnsemble, dim: int = 3,
                     complex_: Optional[bool] = None):
    """Closest reproducible table in L1 distance, and that distance."""
    rhos, complex_ = _setup(ensemble, dim, complex_)
    n = N_OUTCOMES
    blocks = [Block(label(lam, b), dim, complex_) for lam in range(n) for b in range(n)]
    eqs = strategy_constraints(dim, n, n, complex_)
    objective = {}
    one = np.ones((1, 1))
    for b in range(n):
        for x in range(3):
            if not stats.constrained[b, x]:
                continue
            up, dn = f"sp{b}{x}", f"sn{b}{x}"
            blocks += [Block(up, 1), Block(dn, 1)]
            objective[up] = objective[dn] = one
            lhs = {label(lam, b): rhos[x] for lam in range(n)}
            lhs[up], lhs[dn] = one, -one
            eqs.append((lhs, float(stats.probs[b, x])))
    sol = sdpcore.solve(SdpProblem(blocks, objective, eqs, "min"))
    if not sol.optimal:
        raise SolverFailure(f"nearest-feasible projection failed: {sol.status}")
    fitted = model_from_solution(sol, dim).reproduced(rhos)
    fitted = np.clip(fitted, 0.0, None)
    fitted /= fitted.sum(axis=0, keepdims=True)
    # The closest table sits on the boundary of the reproducible set.  A
    # small admixture of the uniform table (reproduced by M = 1/9, which is
    # strictly positive) moves it inside, so the follow-up programs have a
    # strictly feasible point.
    fitted = (1 - INTERIOR_MIX) * fitted + INTERIOR_MIX / n
    mask = stats.constrained
    distance = float(np.abs(fitted - stats.probs)[mask].sum())
    return ConditionalStats(fitted, stats.counts, stats.constrained), distance


def guessing_probability(stats: ConditionalStats, ensemble: PreparedEnsemble, dim: int = 3,
                         *, complex_: Optional[bool] = None, relax: bool = False,
                         check: bool = True) -> GuessingResult:
    """Upper bound on Eve's guessing probability for outcomes of input x = 2.

    Raises :class:`InfeasibleStats` if the table cannot be produced by any
    measurement on ``ensemble`` (unless ``relax`` is set, in which case the
    nearest reproducible table is certified instead).
    """
    distance = 0.0
    if relax:
        stats, distance = nearest_feasible(stats, ensemble, dim, complex_)
    problem = guessing_problem(stats, ensemble, dim, complex_)
    sol = sdpcore.solve(problem)
    if sol.status == sdpcore.INFEASIBLE:
        raise InfeasibleStats(f"statistics cannot be reproduced on the given ensemble "
                              f"(D={dim}); {InfeasibleStats.hint}")
    if not sol.optimal:
        raise SolverFailure(f"guessing SDP failed: {sol.status} ({sol.message})")
    model = model_from_solution(sol, dim)
    if check:
        viol = model.check()
        if viol["psd"] > 1e-9 or viol["marginal"] > 1e-8 or viol["normalisation"] > 1e-8:
            raise SolverFailure(f"post-solve strategy check failed: {viol}")
    gap = max(0.0, sol.duality_gap)
    p_guess = min(1.0, sol.objective_value + gap)
    return GuessingResult(p_guess, sol.objective_value, gap, model, stats, distance, sol)
