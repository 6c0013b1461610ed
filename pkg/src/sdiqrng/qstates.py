"""Preparation geometry: qubit USD states, overlap bounds and their qutrit realisation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .config import TOL


class InfeasibleOverlaps(ValueError):
    """Overlap bounds that no three pure states can satisfy."""


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size not in (2, 3):
            raise ValueError("pure states live in dimension 2 or 3")
        if abs(np.linalg.norm(amps) - 1.0) > TOL.scalar:
            raise ValueError(f"state not normalised: |psi| = {np.linalg.norm(amps)!r}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def padded(self, dim: int) -> "PureState":
        if dim < self.dim:
            raise ValueError("cannot embed into a smaller space")
        out = np.zeros(dim, dtype=complex)
        out[: self.dim] = self.amplitudes
        return PureState(out)

    def projector(self) -> np.ndarray:
        v = self.amplitudes
        return np.outer(v, v.conj())

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class PreparedEnsemble:
    states: tuple
    priors: tuple = (0.25, 0.25, 0.5)

    def __post_init__(self):
        if len(self.states) != 3:
            raise ValueError("the protocol uses exactly three preparations")
        if abs(sum(self.priors) - 1.0) > TOL.scalar or min(self.priors) <= 0:
            raise ValueError(f"priors must be positive and sum to one, got {self.priors}")

    @property
    def dim(self) -> int:
        return max(s.dim for s in self.states)

    def density_matrices(self, dim: int | None = None) -> List[np.ndarray]:
        dim = self.dim if dim is None else dim
        return [s.padded(dim).projector() for s in self.states]

    def is_real(self) -> bool:
        return all(np.allclose(s.amplitudes.imag, 0.0, atol=TOL.scalar) for s in self.states)

    def gram(self) -> np.ndarray:
        dim = self.dim
        vecs = np.array([s.padded(dim).amplitudes for s in self.states])
        return vecs.conj() @ vecs.T


@dataclass(frozen=True)
class OverlapBounds:
    """Trusted lower bounds on ``|<psi_x|psi_y>|``."""

    d01: float
    d02: float
    d12: float

    def __post_init__(self):
        for name in ("d01", "d02", "d12"):
            v = getattr(self, name)
            if not (-TOL.scalar <= v <= 1 + TOL.scalar):
                raise ValueError(f"{name} = {v} outside [0, 1]")

    def as_tuple(self):
        return (self.d01, self.d02, self.d12)


@dataclass(frozen=True)
class Povm:
    elements: tuple

    def __post_init__(self):
        els = tuple(np.asarray(e) for e in self.elements)
        dim = els[0].shape[0]
        for e in els:
            if not np.allclose(e, e.conj().T, atol=TOL.operator):
                raise ValueError("POVM element is not Hermitian")
            if np.linalg.eigvalsh(e).min() < -TOL.operator:
                raise ValueError("POVM element is not PSD")
        if not np.allclose(sum(els), np.eye(dim), atol=TOL.operator):
            raise ValueError("POVM elements do not sum to identity")
        object.__setattr__(self, "elements", els)

    def probabilities(self, state: PureState) -> np.ndarray:
        v = state.amplitudes
        return np.array([np.real(np.vdot(v, e @ v)) for e in self.elements])


def qubit_test_states(phi: float) -> tuple:
    """The two self-test states ``cos(phi/2)|0> +- sin(phi/2)|1>``."""
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    return PureState(np.array([c, s])), PureState(np.array([c, -s]))


def equiprobable_state(theta: float) -> PureState:
    """``cos(theta/2)|0> + i sin(theta/2)|1>``."""
    return PureState(np.array([math.cos(theta / 2), 1j * math.sin(theta / 2)]))


def qubit_ensemble(phi: float, theta: float, priors=(0.25, 0.25, 0.5)) -> PreparedEnsemble:
    psi0, psi1 = qubit_test_states(phi)
    return PreparedEnsemble((psi0, psi1, equiprobable_state(theta)), tuple(priors))


def usd_povm(phi: float) -> Povm:
    """Optimal unambiguous discrimination of the two self-test states.

    ``pi_0`` (``pi_1``) is proportional to the projector orthogonal to
    ``|psi_1>`` (``|psi_0>``), with prefactor ``1/(1+cos phi)``; ``pi_2`` takes
    the remainder.
    """
    if not (-TOL.scalar <= phi <= math.pi / 2 + TOL.scalar):
        raise ValueError(f"phi = {phi} outside [0, pi/2]")
    c, s = math.cos(phi / 2), math.sin(phi / 2)
    # orthogonal complements of |psi_1> = (c, -s) and |psi_0> = (c, s)
    perp1 = np.array([s, c])
    perp0 = np.array([s, -c])
    k = 1.0 / (1.0 + math.cos(phi))
    pi0 = k * np.outer(perp1, perp1)
    pi1 = k * np.outer(perp0, perp0)
    pi2 = np.eye(2) - pi0 - pi1
    # exact zero for the projective case, otherwise tiny negative eigenvalues
    pi2[np.abs(pi2) < 1e-15] = 0.0
    return Povm((pi0, pi1, pi2))


def equiprobable_theta(phi: float) -> float:
    """Angle of the third state making all three USD outcomes equally likely."""
    cphi = math.cos(phi)
    if cphi < 0.2 - TOL.scalar:
        raise InfeasibleOverlaps(f"cos(phi) = {cphi:.6g} < 1/5: no equiprobable third state")
    ctheta = (1 - 2 * cphi) / (3 * cphi)
    return math.acos(min(1.0, max(-1.0, ctheta)))


def min_inconclusive(p0: float, p1: float, phi: float) -> float:
    """Lower bound ``2 sqrt(p0 p1) cos(phi)`` on the inconclusive rate."""
    if p0 < 0 or p1 < 0 or p0 + p1 > 1 + TOL.scalar:
        raise ValueError("need p0, p1 >= 0 and p0 + p1 <= 1")
    return 2 * math.sqrt(p0 * p1) * math.cos(phi)


def overlap_feasible(d: OverlapBounds) -> bool:
    d01, d02, d12 = d.as_tuple()
    return 1.0 + TOL.scalar >= d02**2 + d12**2 + d01**2 - 2 * d01 * d02 * d12


def a_lower_bound(d: OverlapBounds) -> float:
    """Minimal weight of the third state inside the span of the first two.

    Negative raw values mean the overlaps impose no constraint and are
    reported as 0.
    """
    d01, d02, d12 = d.as_tuple()
    if 1.0 - d01 <= TOL.scalar:
        raise ValueError("d01 = 1: the two test states coincide, certification is vacuous")
    if not overlap_feasible(d):
        raise InfeasibleOverlaps(f"overlap bounds {d.as_tuple()} are not jointly realisable")
    raw = (d02**2 + d12**2 - 2 * d01 * d02 * d12) / (1 - d01**2)
    return min(1.0, max(0.0, raw))


def tilde_states(d: OverlapBounds, priors=(0.25, 0.25, 0.5)) -> PreparedEnsemble:
    """Three real qutrit states whose pairwise overlaps equal the bounds."""
    d01, d02, d12 = d.as_tuple()
    d01 = min(d01, 1.0)
    u = math.sqrt((1 + d01) / 2)
    v = math.sqrt(max(0.0, (1 - d01) / 2))
    first = (d02 + d12) / math.sqrt(2 * (1 + d01))
    if 1 - d01 <= TOL.scalar:
        if abs(d02 - d12) > math.sqrt(TOL.scalar):
            raise InfeasibleOverlaps("d01 = 1 requires d02 = d12")
        second = 0.0
    else:
        second = (d02 - d12) / math.sqrt(2 * (1 - d01))
    radicand = 1 - first**2 - second**2
    if radicand < -1e-10:
        raise InfeasibleOverlaps(f"overlap bounds {d.as_tuple()} are not jointly realisable "
                                 f"(third component squared = {radicand:.3g})")
    third = math.sqrt(max(0.0, radicand))
    psi0 = PureState(np.array([u, v, 0.0]))
    psi1 = PureState(np.array([u, -v, 0.0]))
    norm = math.sqrt(first**2 + second**2 + third**2)
    psi2 = PureState(np.array([first, second, third]) / norm)
    return PreparedEnsemble((psi0, psi1, psi2), tuple(priors))


def qubit_ensemble_from_overlaps(d: OverlapBounds, priors=(0.25, 0.25, 0.5)) -> PreparedEnsemble:
    """Qubit ensemble with ``|<psi_0|psi_1>| = d01`` and the mean squared
    third-state overlap equal to ``(d02^2 + d12^2)/2``.

    Used to compare against the dimension-assuming (qubit) certification.
    """
    d01, d02, d12 = d.as_tuple()
    phi = math.acos(min(1.0, d01))
    if d01 <= 0:
        ctheta = 0.0
    else:
        ctheta = (d02**2 + d12**2 - 1) / d01
    theta = math.acos(min(1.0, max(-1.0, ctheta)))
    return qubit_ensemble(phi, theta, priors)


def support_nulling_tilde(d01: float, gamma: float = 0.0) -> float:
    """``|d02| = |d12|`` at which the third tilde component vanishes."""
    return math.sqrt((1 - d01**2) / (2 * (1 - d01 * math.cos(2 * gamma))))


def overlaps_of(ensemble: PreparedEnsemble) -> OverlapBounds:
    g = np.abs(ensemble.gram())
    return OverlapBounds(min(1.0, g[0, 1]), min(1.0, g[0, 2]), min(1.0, g[1, 2]))


def stats_from_povm(ensemble: PreparedEnsemble, elements: Sequence[np.ndarray]) -> np.ndarray:
    """``p[b, x] = <psi_x| pi_b |psi_x>``."""
    dim = np.asarray(elements[0]).shape[0]
    rhos = ensemble.density_matrices(dim)
    return np.array([[np.real(np.trace(e @ r)) for r in rhos] for e in elements])
