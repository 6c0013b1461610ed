"""Lower bound on the x = 2 conditional Shannon entropy by alternating SDPs.

For classical side information the Gauss-Radau variational bound reads

    S* = c_m + sum_i tau_i sum_{lam,b} [ P_{lam b} (2 z + (1 - t_i) eta)
                                         + q_lam t_i eta ]

with ``P_{lam b} = Tr[M_b^lam rho_2]``, ``q_lam = Tr[sum_b M_b^lam] / D`` and
every ``[[1, z], [z, eta]] >= 0``.  The objective is minimised alternately
over the scalars (closed form, or the equivalent 2x2 SDP) and over the
strategy blocks ``M`` (an SDP with the reproduction constraints).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import sdpcore
from .guessing import (InfeasibleStats, SolverFailure, label, reproduction_constraints,
                       strategy_constraints)
from .qstates import PreparedEnsemble
from .radau import QuadratureRule, gauss_radau
from .sdpcore import Block, SdpProblem
from .stats import ConditionalStats

log = logging.getLogger(__name__)


class SeesawNotConverged(RuntimeError):
    def __init__(self, message, trajectories):
        super().__init__(message)
        self.trajectories = trajectories


@dataclass
class SeesawOptions:
    n_lambda: int = 3
    block_size: int = 10          # iterations averaged in each Delta_k
    tol: float = 1e-4             # stop once Delta_k < tol
    k_max: int = 20               # blocks per start before giving up on it
    restarts: int = 5             # independent starts (first is the USD-like one)
    seed: int = 0
    noise: float = 0.05
    descent_tol: float = 1e-7


@dataclass
class SeesawState:
    z: np.ndarray                 # (m-1, n_lambda, n_b)
    eta: np.ndarray
    blocks: List[List[np.ndarray]]
    value: float
    iteration: int = 0
    deltas: List[float] = field(default_factory=list)


@dataclass
class SeesawResult:
    s_star: float
    state: SeesawState
    trajectory: List[float]
    restart_values: List[float]
    converged: List[bool]
    descent_violations: int = 0
    trajectories: List[List[float]] = field(default_factory=list, repr=False)

    def diagnostics_rows(self):
        """``(restart, iteration, objective)`` rows for convergence plots."""
        rows = []
        for r, traj in enumerate(self.trajectories):
            for it, val in enumerate(traj):
                rows.append((r, it, val))
        return rows


def _probs_and_weights(blocks, rho2, dim):
    p = np.array([[np.real(np.trace(m @ rho2)) for m in row] for row in blocks])
    q = np.array([np.real(np.trace(sum(row))) / dim for row in blocks])
    return np.clip(p, 0.0, None), np.clip(q, 0.0, None)


def objective(rule: QuadratureRule, p: np.ndarray, q: np.ndarray,
              z: np.ndarray, eta: np.ndarray) -> float:
    """Bound value for outcome weights ``p[lam, b]``, ``q[lam]`` and scalars."""
    t = rule.nodes[:-1][:, None, None]
    tau = rule.tau[:, None, None]
    terms = p[None] * (2 * z + (1 - t) * eta) + q[None, :, None] * t * eta
    return float(rule.tau.sum() + np.sum(tau * terms))


def step2(rule: QuadratureRule, p: np.ndarray, q: np.ndarray):
    """Optimal scalars for fixed strategies.

    Each ``(i, lam, b)`` term ``P (2z + (1-t) eta) + q t eta`` with
    ``eta >= z^2`` is minimised at ``z = -P / a``, ``eta = z^2`` where
    ``a = P (1-t) + q t``; when ``a = 0`` the term vanishes identically.
    """
    t = rule.nodes[:-1][:, None, None]
    a = p[None] * (1 - t) + q[None, :, None] * t
    safe = np.where(a > 0, a, 1.0)
    z = np.where(a > 0, -p[None] / safe, 0.0)
    return z, z * z


def step2_sdp(rule: QuadratureRule, p: np.ndarray, q: np.ndarray):
    """Same as :func:`step2`, solved as 2x2 SDPs (cross-check path)."""
    mcount = rule.m - 1
    n_lam, n_b = p.shape
    z = np.zeros((mcount, n_lam, n_b))
    eta = np.zeros_like(z)
    for i in range(mcount):
        t = rule.nodes[i]
        for lam in range(n_lam):
            for b in range(n_b):
                # Gamma = [[1, z], [z, eta]] >= 0, minimise P(2z + (1-t)eta) + q t eta
                c = np.array([[0.0, p[lam, b]], [p[lam, b], p[lam, b] * (1 - t) + q[lam] * t]])
                prob = SdpProblem([Block("G", 2)], {"G": c},
                                  [({"G": np.array([[1.0, 0.0], [0.0, 0.0]])}, 1.0)], "min")
                sol = sdpcore.solve(prob)
                if sol.optimal:
                    z[i, lam, b] = sol.blocks["G"][0, 1]
                    eta[i, lam, b] = sol.blocks["G"][1, 1]
    return z, eta


class _Step4:
    """Step-4 SDP skeleton; only the objective changes between iterations."""

    def __init__(self, stats, ensemble, dim, n_lambda, complex_):
        if ensemble.dim > dim:
            raise ValueError("ensemble dimension exceeds Eve's dimension")
        if complex_ is None:
            complex_ = not ensemble.is_real()
        rhos = ensemble.density_matrices(dim)
        if not complex_:
            rhos = [r.real for r in rhos]
        self.rhos = rhos
        self.dim = dim
        self.n_lambda = n_lambda
        self.complex_ = complex_
        self.blocks = [Block(label(lam, b), dim, complex_)
                       for lam in range(n_lambda) for b in range(3)]
        self.equalities = (strategy_constraints(dim, n_lambda, 3, complex_)
                           + reproduction_constraints(stats, rhos, n_lambda))

    def solve(self, rule, z, eta):
        t = rule.nodes[:-1][:, None, None]
        tau = rule.tau[:, None, None]
        coef_p = np.sum(tau * (2 * z + (1 - t) * eta), axis=0)        # (lam, b)
        coef_q = np.sum(tau * t * eta, axis=(0, 2))                    # (lam,)
        eye = np.eye(self.dim) / self.dim
        obj = {label(lam, b): coef_p[lam, b] * self.rhos[2] + coef_q[lam] * eye
               for lam in range(self.n_lambda) for b in range(3)}
        sol = sdpcore.solve(SdpProblem(self.blocks, obj, self.equalities, "min"))
        if sol.status == sdpcore.INFEASIBLE:
            raise InfeasibleStats(f"statistics cannot be reproduced (D={self.dim}); "
                                  f"{InfeasibleStats.hint}")
        if not sol.optimal:
            raise SolverFailure(f"step-4 SDP failed: {sol.status} ({sol.message})")
        return [[sol.blocks[label(lam, b)] for b in range(3)] for lam in range(self.n_lambda)]


def _random_povm(rng, dim, n_b):
    els = []
    for _ in range(n_b):
        v = rng.normal(size=(dim,))
        els.append(np.outer(v, v) + 1e-3 * np.eye(dim))
    return _normalise(els)


def _normalise(els):
    total = sum(els)
    w, u = np.linalg.eigh(total)
    inv_sqrt = u @ np.diag(w ** -0.5) @ u.conj().T
    return [inv_sqrt @ e @ inv_sqrt for e in els]


def _usd_like_povm(ensemble, dim, peak, noise, rng):
    """USD POVM on the span of the test states, tilted toward outcome ``peak``."""
    psi0 = ensemble.states[0].padded(dim).amplitudes.real
    psi1 = ensemble.states[1].padded(dim).amplitudes.real
    c = float(psi0 @ psi1)
    els = []
    for keep, kill in ((psi0, psi1), (psi1, psi0)):
        v = keep - c * kill
        n = np.linalg.norm(v)
        els.append(np.outer(v, v) / (n * n * (1 + abs(c))) if n > 1e-9 else np.zeros((dim, dim)))
    els.append(np.eye(dim) - els[0] - els[1])
    det = [np.eye(dim) if b == peak else np.zeros((dim, dim)) for b in range(3)]
    mix = _random_povm(rng, dim, 3)
    els = [0.7 * e + 0.3 * g for e, g in zip(els, det)]
    return _normalise([(1 - noise) * e + noise * r for e, r in zip(els, mix)])


def _initial_blocks(ensemble, dim, n_lambda, restart, opts, rng):
    blocks = []
    for lam in range(n_lambda):
        if restart == 0:
            povm = _usd_like_povm(ensemble, dim, lam % 3, opts.noise, rng)
        else:
            povm = _random_povm(rng, dim, 3)
        blocks.append([e / n_lambda for e in povm])
    return blocks


def _run(step4, rule, rho2, dim, blocks, opts):
    p, q = _probs_and_weights(blocks, rho2, dim)
    z, eta = step2(rule, p, q)
    trajectory = []
    deltas = []
    violations = 0
    converged = False
    last = None
    accepted = None                     # last feasible strategy blocks
    for k in range(opts.k_max):
        for _ in range(opts.block_size):
            candidate = step4.solve(rule, z, eta)
            p, q = _probs_and_weights(candidate, rho2, dim)
            after4 = objective(rule, p, q, z, eta)
            if accepted is not None:
                p_old, q_old = _probs_and_weights(accepted, rho2, dim)
                before = objective(rule, p_old, q_old, z, eta)
                # the solver's optimum is only accurate to its gap; never
                # trade a feasible iterate for a worse one
                if after4 > before:
                    candidate, p, q, after4 = accepted, p_old, q_old, before
            accepted = blocks = candidate
            z, eta = step2(rule, p, q)
            value = objective(rule, p, q, z, eta)
            for v in (after4, value):
                if last is not None and v > last + opts.descent_tol:
                    violations += 1
                    log.warning("see-saw ascent %.3g at iteration %d", v - last, len(trajectory))
                last = v
            trajectory.append(value)
        window = np.array(trajectory[-opts.block_size - 1:])
        delta = float(np.mean(np.abs(np.diff(window)))) if window.size > 1 else 0.0
        deltas.append(delta)
        if delta < opts.tol:
            converged = True
            break
    state = SeesawState(z, eta, blocks, trajectory[-1], len(trajectory), deltas)
    return state, trajectory, converged, violations


def shannon_bound(stats: ConditionalStats, ensemble: PreparedEnsemble,
                  rule: Optional[QuadratureRule] = None, dim: int = 3,
                  opts: Optional[SeesawOptions] = None, *,
                  complex_: Optional[bool] = None) -> SeesawResult:
    """See-saw estimate of the lower bound S* (bits) on H(B | E, x=2).

    Runs ``opts.restarts`` starts; the smallest converged value wins.
    """
    rule = rule or gauss_radau(8)
    opts = opts or SeesawOptions()
    step4 = _Step4(stats, ensemble, dim, opts.n_lambda, complex_)
    rho2 = step4.rhos[2]
    rng = np.random.default_rng(opts.seed)

    results = []
    for restart in range(opts.restarts):
        blocks = _initial_blocks(ensemble, dim, opts.n_lambda, restart, opts, rng)
        results.append(_run(step4, rule, rho2, dim, blocks, opts))

    trajectories = [r[1] for r in results]
    converged = [r[2] for r in results]
    if not any(converged):
        raise SeesawNotConverged("see-saw did not converge from any start", trajectories)
    best = min((r for r in results if r[2]), key=lambda r: r[0].value)
    return SeesawResult(
        s_star=best[0].value,
        state=best[0],
        trajectory=best[1],
        restart_values=[r[0].value for r in results],
        converged=converged,
        descent_violations=sum(r[3] for r in results),
        trajectories=trajectories,
    )


def eve_free_bound(probs, rule: QuadratureRule) -> float:
    """Value of the bound when Eve holds no information (single strategy)."""
    p = np.asarray(probs, dtype=float)
    t = rule.nodes[:-1][:, None]
    a = p[None] * (1 - t) + t
    return float(rule.tau.sum() - np.sum(rule.tau[:, None] * p[None] ** 2 / a))


def shannon_entropy(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))
