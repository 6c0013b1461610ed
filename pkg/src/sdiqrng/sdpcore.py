"""Small dense semidefinite programs over Hermitian matrix blocks.

A problem is a linear functional of a handful of Hermitian matrix variables,
linear equality constraints and PSD-cone membership of every block.  Real
symmetric blocks are parameterised by their upper triangle; complex Hermitian
blocks additionally carry the strictly-upper imaginary part and enter the cone
through the real embedding ``[[Re, -Im], [Im, Re]]``.

The numerical work is delegated to interior-point solvers (``cvxopt`` first,
``clarabel`` as fallback).  Everything around them (facial reduction,
parameterisation, redundant equality elimination, post-solve certification,
plain-text dump format) is local to this module.

Dump format
-----------
Plain text, ``#`` starts a comment, blank lines ignored::

    sense max
    block X 2 real
    objective X
    0.7 0
    0 0.3
    equality 1
    X
    1 0
    0 1

``block <label> <dim> real|complex`` declares a variable.  ``objective`` and
``equality <rhs>`` are followed by one or more ``<label>`` headers, each
followed by ``dim`` rows of row-major entries.  Complex entries use Python
syntax (``0.5+0.1j``).
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .config import TOL

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
NUMERICAL_FAILURE = "numerical-failure"


class SdpError(RuntimeError):
    """Raised when a solution is requested from a non-optimal solve."""

    def __init__(self, message: str, status: str):
        super().__init__(message)
        self.status = status


@dataclass
class Block:
    label: str
    dim: int
    complex: bool = False


@dataclass
class SdpProblem:
    """Linear objective and equalities over Hermitian PSD blocks.

    ``objective`` and each equality's left-hand side map block labels to
    coefficient matrices ``C``; the functional is ``sum Re Tr[C X]``.
    Blocks absent from a mapping have zero coefficient.
    """

    blocks: List[Block]
    objective: Dict[str, np.ndarray]
    equalities: List[Tuple[Dict[str, np.ndarray], float]] = field(default_factory=list)
    sense: str = "max"

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {self.sense!r}")
        dims = {}
        for b in self.blocks:
            if b.label in dims:
                raise ValueError(f"duplicate block label {b.label!r}")
            dims[b.label] = b.dim
        for coefs in [self.objective] + [lhs for lhs, _ in self.equalities]:
            for label, c in coefs.items():
                if label not in dims:
                    raise ValueError(f"unknown block {label!r}")
                c = np.asarray(c)
                if c.shape != (dims[label], dims[label]):
                    raise ValueError(f"coefficient for {label!r} has shape {c.shape}")
                if not np.allclose(c, c.conj().T, atol=1e-12):
                    raise ValueError(f"coefficient for {label!r} is not Hermitian")

    def block(self, label: str) -> Block:
        for b in self.blocks:
            if b.label == label:
                return b
        raise KeyError(label)

    def evaluate(self, coefs: Dict[str, np.ndarray], values: Dict[str, np.ndarray]) -> float:
        return float(sum(np.real(np.trace(np.asarray(c) @ values[k])) for k, c in coefs.items()))

    def scaled(self, factor: float) -> "SdpProblem":
        """Same feasible set, objective multiplied by ``factor``."""
        obj = {k: factor * np.asarray(c) for k, c in self.objective.items()}
        return SdpProblem(list(self.blocks), obj, list(self.equalities), self.sense)


@dataclass
class SdpSolution:
    status: str
    objective_value: float = float("nan")
    blocks: Dict[str, np.ndarray] = field(default_factory=dict)
    duality_gap: float = float("nan")
    max_equality_residual: float = float("nan")
    min_eigenvalue: float = float("nan")
    iterations: int = 0
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    @property
    def upper_bound(self) -> float:
        """Objective plus gap (safe side for maximisations)."""
        return self.objective_value + self.duality_gap

    def raise_for_status(self) -> "SdpSolution":
        if not self.optimal:
            raise SdpError(f"SDP not solved to optimality: {self.status} ({self.message})",
                           self.status)
        return self


# -- parameterisation ---------------------------------------------------------

class _Layout:
    """Maps blocks to slices of the real parameter vector."""

    def __init__(self, blocks: Sequence[Block]):
        self.blocks = list(blocks)
        self.offsets = {}
        n = 0
        for b in self.blocks:
            self.offsets[b.label] = n
            n += self.block_size(b)
        self.n = n

    @staticmethod
    def block_size(b: Block) -> int:
        size = b.dim * (b.dim + 1) // 2
        if b.complex:
            size += b.dim * (b.dim - 1) // 2
        return size

    @staticmethod
    def basis(b: Block) -> List[np.ndarray]:
        """Hermitian basis matrices, in parameter order."""
        d = b.dim
        out = []
        for i in range(d):
            for j in range(i, d):
                e = np.zeros((d, d), dtype=complex if b.complex else float)
                e[i, j] = e[j, i] = 1.0
                out.append(e)
        if b.complex:
            for i in range(d):
                for j in range(i + 1, d):
                    e = np.zeros((d, d), dtype=complex)
                    e[i, j] = 1j
                    e[j, i] = -1j
                    out.append(e)
        return out

    def linear_row(self, coefs: Dict[str, np.ndarray]) -> np.ndarray:
        """Row ``r`` such that ``sum Re Tr[C X] = r @ x``."""
        row = np.zeros(self.n)
        for b in self.blocks:
            if b.label not in coefs:
                continue
            c = np.asarray(coefs[b.label])
            off = self.offsets[b.label]
            for k, e in enumerate(self.basis(b)):
                row[off + k] = np.real(np.trace(c @ e))
        return row

    def unpack(self, x: np.ndarray) -> Dict[str, np.ndarray]:
        out = {}
        for b in self.blocks:
            off = self.offsets[b.label]
            basis = self.basis(b)
            out[b.label] = sum(x[off + k] * e for k, e in enumerate(basis))
        return out

    def cone_columns(self, b: Block) -> np.ndarray:
        """Column-major vec of the (embedded) cone matrix per parameter."""
        cols = []
        for e in self.basis(b):
            cols.append(_embed(e).ravel(order="F") if b.complex else e.real.ravel(order="F"))
        return np.array(cols).T


def _embed(h: np.ndarray) -> np.ndarray:
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def _independent_rows(a: np.ndarray, tol: float) -> np.ndarray:
    if a.shape[0] == 0:
        return np.zeros(0, dtype=int)
    _, r, piv = scipy.linalg.qr(a.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    if diag.size == 0 or diag[0] == 0:
        return np.zeros(0, dtype=int)
    rank = int(np.sum(diag > tol * diag[0]))
    return np.sort(piv[:rank])


# -- solve --------------------------------------------------------------------

@dataclass
class _Raw:
    """Backend output before certification."""

    status: str                 # "solved", "infeasible" or "failed"
    x: Optional[np.ndarray] = None
    dual_value: float = float("nan")   # in the sense of the original problem
    iterations: int = 0
    message: str = ""


class _Compiled:
    """Problem in parameter space: objective row, equalities, per-block cones."""

    def __init__(self, problem: SdpProblem):
        self.problem = problem
        self.layout = _Layout(problem.blocks)
        self.sign = -1.0 if problem.sense == "max" else 1.0
        self.c = self.layout.linear_row(problem.objective)
        n = self.layout.n
        self.a_full = np.array([self.layout.linear_row(lhs)
                                for lhs, _ in problem.equalities]).reshape(-1, n)
        self.b_full = np.array([rhs for _, rhs in problem.equalities], dtype=float)
        self.keep = _independent_rows(self.a_full, 1e-10)
        self.a = self.a_full[self.keep]
        self.b = self.b_full[self.keep]
        self.a_pinv = np.linalg.pinv(self.a) if self.a.shape[0] else None

    def inconsistent(self) -> bool:
        if not self.a_full.shape[0]:
            return False
        x_ls, *_ = np.linalg.lstsq(self.a, self.b, rcond=None)
        resid = np.abs(self.a_full @ x_ls - self.b_full)
        return resid.max(initial=0.0) > 1e-9 * max(1.0, float(np.abs(self.b_full).max()))

    def residual(self, x: np.ndarray) -> float:
        if not self.a_full.shape[0]:
            return 0.0
        return float(np.max(np.abs(self.a_full @ x - self.b_full)))

    def min_eig(self, x: np.ndarray) -> float:
        blocks = self.layout.unpack(x)
        return min(float(np.linalg.eigvalsh(m).min()) for m in blocks.values())

    def project_equalities(self, x: np.ndarray) -> np.ndarray:
        if self.a_pinv is None:
            return x
        return x + self.a_pinv @ (self.b - self.a @ x)

    def polish(self, x: np.ndarray) -> np.ndarray:
        """Move an interior-point iterate onto the feasible set.

        First a least-norm equality correction.  If that leaves negative
        eigenvalues, the eigen-directions below a threshold are dropped
        (the iterate is taken to lie on that face of the cone) and the
        equalities are re-imposed inside the face, where the kept
        eigenvalues leave room for the correction.  The threshold grows
        until the restricted system is consistent and PSD.
        """
        x = self.project_equalities(x)
        if self.min_eig(x) >= -0.1 * TOL.sdp_psd:
            return x
        neg = max(1e-12, -self.min_eig(x))
        for kappa in neg * np.array([10.0, 100.0, 1e3, 1e4]):
            y = self._face_correction(x, kappa)
            if y is not None:
                return y
        return x

    def _face_correction(self, x: np.ndarray, kappa: float) -> Optional[np.ndarray]:
        blocks = self.layout.unpack(x)
        cols, y0 = [], []
        for blk in self.problem.blocks:
            w, u = np.linalg.eigh(blocks[blk.label])
            v = u[:, w > kappa]
            r = v.shape[1]
            if r == 0:
                continue
            sub = Block(blk.label, r, blk.complex)
            y_blk = v.conj().T @ blocks[blk.label] @ v
            y0.append(_params(sub, y_blk))
            off = self.layout.offsets[blk.label]
            for e in _Layout.basis(sub):
                col = np.zeros(self.layout.n)
                col[off:off + _Layout.block_size(blk)] = _params(blk, v @ e @ v.conj().T)
                cols.append(col)
        if not cols:
            return None
        t = np.array(cols).T
        y = np.concatenate(y0)
        if self.a.shape[0]:
            at = self.a @ t
            y = y + np.linalg.lstsq(at, self.b - at @ y, rcond=None)[0]
        cand = t @ y
        if self.residual(cand) > 0.1 * TOL.sdp_equality or self.min_eig(cand) < -0.1 * TOL.sdp_psd:
            return None
        return cand


def _params(blk: Block, mat: np.ndarray) -> np.ndarray:
    d = blk.dim
    out = [mat[i, j].real for i in range(d) for j in range(i, d)]
    if blk.complex:
        out += [mat[i, j].imag for i in range(d) for j in range(i + 1, d)]
    return np.array(out)


SOLVER_OPTIONS = {
    "show_progress": False,
    "maxiters": 100,
}


def _run_cvxopt(cp: _Compiled, tol: float = 1e-9) -> _Raw:
    import cvxopt
    from cvxopt import solvers

    lay = cp.layout
    gs, hs = [], []
    for blk in cp.problem.blocks:
        local = lay.cone_columns(blk)
        full = np.zeros((local.shape[0], lay.n))
        off = lay.offsets[blk.label]
        full[:, off:off + local.shape[1]] = local
        size = 2 * blk.dim if blk.complex else blk.dim
        gs.append(cvxopt.matrix(-full))
        hs.append(cvxopt.matrix(np.zeros((size, size))))
    kwargs = dict(Gs=gs, hs=hs)
    if cp.a.shape[0]:
        kwargs["A"] = cvxopt.matrix(cp.a)
        kwargs["b"] = cvxopt.matrix(cp.b)
    try:
        res = solvers.sdp(cvxopt.matrix(cp.sign * cp.c), options=dict(SOLVER_OPTIONS, abstol=tol, reltol=tol, feastol=tol),
                           **kwargs)
    except (ValueError, ArithmeticError) as exc:
        return _Raw("failed", message=f"cvxopt: {exc}")
    status = res["status"]
    if status == "primal infeasible":
        return _Raw("infeasible", message="cvxopt: primal infeasible")
    if res["x"] is None:
        return _Raw("failed", message=f"cvxopt: {status}")
    dual = res.get("dual objective")
    dual = cp.sign * dual if dual is not None else float("nan")
    return _Raw("solved", np.array(res["x"]).ravel(), dual, res.get("iterations", 0),
                f"cvxopt: {status}")


def _run_clarabel(cp: _Compiled) -> _Raw:
    import clarabel
    import scipy.sparse as sp

    lay = cp.layout
    rows, rhs, cones = [cp.a], [cp.b], []
    if cp.a.shape[0]:
        cones.append(clarabel.ZeroConeT(int(cp.a.shape[0])))
    for blk in cp.problem.blocks:
        off = lay.offsets[blk.label]
        mats = [_embed(e) if blk.complex else e.real for e in lay.basis(blk)]
        size = mats[0].shape[0]
        block_rows = np.zeros((size * (size + 1) // 2, lay.n))
        for k, m in enumerate(mats):
            block_rows[:, off + k] = -_svec(m)
        rows.append(block_rows)
        rhs.append(np.zeros(block_rows.shape[0]))
        cones.append(clarabel.PSDTriangleConeT(size))
    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = 1e-10
    settings.tol_gap_rel = 1e-10
    settings.tol_feas = 1e-10
    settings.max_iter = 200
    try:
        solver = clarabel.DefaultSolver(sp.csc_matrix((lay.n, lay.n)), cp.sign * cp.c,
                                        sp.csc_matrix(np.vstack(rows)), np.concatenate(rhs),
                                        cones, settings)
        res = solver.solve()
    except Exception as exc:  # clarabel raises plain exceptions on bad data
        return _Raw("failed", message=f"clarabel: {exc}")
    status = str(res.status)
    if status in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        return _Raw("infeasible", message=f"clarabel: {status}", iterations=res.iterations)
    if status in ("DualInfeasible", "AlmostDualInfeasible"):
        return _Raw("failed", message=f"clarabel: unbounded ({status})")
    return _Raw("solved", np.array(res.x), cp.sign * res.obj_val_dual, res.iterations,
                f"clarabel: {status}")


def _svec(mat: np.ndarray) -> np.ndarray:
    """Scaled upper triangle, column-major (Clarabel's PSD triangle layout)."""
    n = mat.shape[0]
    return np.array([mat[i, j] if i == j else math.sqrt(2.0) * mat[i, j]
                     for j in range(n) for i in range(j + 1)])


# Tighter cvxopt tolerances than 1e-9 tend to hit a singular KKT system
# near degenerate optima; the looser run is a last resort.
BACKENDS = {
    "cvxopt": _run_cvxopt,
    "clarabel": _run_clarabel,
    "cvxopt-loose": lambda cp: _run_cvxopt(cp, 1e-7),
}
BACKEND_ORDER = ("cvxopt", "clarabel", "cvxopt-loose")


def _certify(cp: _Compiled, raw: _Raw) -> SdpSolution:
    x = cp.polish(raw.x.copy())
    blocks = cp.layout.unpack(x)
    value = cp.problem.evaluate(cp.problem.objective, blocks)
    residual = cp.residual(x)
    min_eig = cp.min_eig(x)
    gap = abs(raw.dual_value - value) if np.isfinite(raw.dual_value) else float("inf")
    ok = min_eig >= -TOL.sdp_psd and residual <= TOL.sdp_equality and gap <= TOL.sdp_gap
    return SdpSolution(OPTIMAL if ok else NUMERICAL_FAILURE, value, blocks, gap, residual,
                       min_eig, raw.iterations, raw.message)


def _reduce_faces(problem: SdpProblem):
    """Restrict blocks to the faces forced by zero-valued PSD equalities.

    An equality ``sum_k Tr[C_k X_k] = 0`` whose coefficients are all PSD (or
    all NSD) forces ``X_k C_k = 0``, so every ``X_k`` lives on the null space
    of ``C_k``.  Such problems have no strictly feasible point, which stalls
    interior-point methods; solving on the face removes the degeneracy
    exactly.  Returns the reduced problem and, per label, an isometry ``V``
    with ``X = V Y V^dagger`` (``None`` when the block is untouched).
    """
    dims = {b.label: b.dim for b in problem.blocks}
    ranges: Dict[str, Optional[np.ndarray]] = {lab: None for lab in dims}

    def restrict(lab, c):
        v = ranges[lab]
        c = np.asarray(c)
        return c if v is None else v.conj().T @ c @ v

    changed = True
    while changed:
        changed = False
        for lhs, rhs in problem.equalities:
            if rhs != 0.0:
                continue
            coefs = {lab: restrict(lab, c) for lab, c in lhs.items()}
            coefs = {lab: c for lab, c in coefs.items() if c.size and np.abs(c).max() > 1e-14}
            if not coefs:
                continue
            eigs = {lab: np.linalg.eigh(c) for lab, c in coefs.items()}
            scale = max(np.abs(w).max() for w, _ in eigs.values())
            cut = 1e-10 * scale
            if all(w.min() >= -cut for w, _ in eigs.values()):
                sign = 1.0
            elif all(w.max() <= cut for w, _ in eigs.values()):
                sign = -1.0
            else:
                continue
            for lab, (w, u) in eigs.items():
                keep = sign * w <= cut
                if keep.all():
                    continue
                v = ranges[lab] if ranges[lab] is not None else np.eye(dims[lab])
                ranges[lab] = v @ u[:, keep]
                changed = True

    if all(v is None for v in ranges.values()):
        return problem, ranges
    blocks = [Block(b.label, ranges[b.label].shape[1] if ranges[b.label] is not None else b.dim,
                    b.complex) for b in problem.blocks]
    live = {b.label for b in blocks if b.dim > 0}

    def reduce(coefs):
        return {lab: restrict(lab, c) for lab, c in coefs.items() if lab in live}

    reduced = SdpProblem([b for b in blocks if b.dim > 0], reduce(problem.objective),
                         [(reduce(lhs), rhs) for lhs, rhs in problem.equalities],
                         problem.sense)
    return reduced, ranges


def _lift(problem: SdpProblem, ranges, sol: SdpSolution) -> SdpSolution:
    if all(v is None for v in ranges.values()) or not sol.blocks and sol.status != OPTIMAL:
        return sol
    blocks = {}
    for b in problem.blocks:
        v = ranges[b.label]
        if v is None:
            blocks[b.label] = sol.blocks[b.label]
        elif v.shape[1] == 0:
            blocks[b.label] = np.zeros((b.dim, b.dim), dtype=complex if b.complex else float)
        else:
            blocks[b.label] = v @ sol.blocks[b.label] @ v.conj().T
    return dataclasses.replace(sol, blocks=blocks)


def solve(problem: SdpProblem, *, backends: Sequence[str] = BACKEND_ORDER) -> SdpSolution:
    """Solve ``problem`` and certify the result.

    ``optimal`` is reported only if every block is PSD to ``TOL.sdp_psd``,
    every equality (including ones dropped as linearly dependent) holds to
    ``TOL.sdp_equality`` and the primal-dual gap is below ``TOL.sdp_gap``.
    Blocks are first restricted to faces forced by zero-valued PSD
    equalities.  Each raw interior-point iterate is polished back onto the
    feasible set before the checks.  A failed attempt is retried with the
    next backend, i.e. from a different starting point and central path.
    """
    reduced, ranges = _reduce_faces(problem)
    return _lift(problem, ranges, _solve_reduced(reduced, backends))


def _solve_reduced(problem: SdpProblem, backends: Sequence[str]) -> SdpSolution:
    cp = _Compiled(problem)
    if cp.inconsistent():
        return SdpSolution(INFEASIBLE, message="linear equality system is inconsistent")
    if cp.layout.n == 0:
        return SdpSolution(OPTIMAL, 0.0, {}, 0.0, cp.residual(np.zeros(0)), 0.0,
                           message="no free variables")
    best: Optional[SdpSolution] = None
    infeasible_votes = []
    for name in backends:
        raw = BACKENDS[name](cp)
        if raw.status == "infeasible":
            infeasible_votes.append(raw.message)
            continue
        if raw.status == "failed":
            log.debug("%s", raw.message)
            continue
        sol = _certify(cp, raw)
        if sol.optimal:
            return sol
        log.debug("uncertified %s: gap=%.3g resid=%.3g eig=%.3g", raw.message,
                  sol.duality_gap, sol.max_equality_residual, sol.min_eigenvalue)
        if best is None or sol.duality_gap < best.duality_gap:
            best = sol
    if infeasible_votes and (best is None or best.max_equality_residual > 1e-6):
        return SdpSolution(INFEASIBLE, message="; ".join(infeasible_votes))
    return best or SdpSolution(NUMERICAL_FAILURE, message="all backends failed")


# -- plain-text dump ----------------------------------------------------------

def _fmt(v: complex, is_complex: bool) -> str:
    if is_complex:
        return repr(complex(v))
    return repr(float(np.real(v)))


def dump(problem: SdpProblem) -> str:
    lines = [f"sense {problem.sense}"]
    for b in problem.blocks:
        lines.append(f"block {b.label} {b.dim} {'complex' if b.complex else 'real'}")

    def section(coefs):
        for label, c in coefs.items():
            blk = problem.block(label)
            lines.append(label)
            for row in np.asarray(c):
                lines.append(" ".join(_fmt(v, blk.complex) for v in row))

    lines.append("objective")
    section(problem.objective)
    for lhs, rhs in problem.equalities:
        lines.append(f"equality {float(rhs)!r}")
        section(lhs)
    return "\n".join(lines) + "\n"


def load(text: str) -> SdpProblem:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    sense = "max"
    blocks: List[Block] = []
    objective: Dict[str, np.ndarray] = {}
    equalities: List[Tuple[Dict[str, np.ndarray], float]] = []
    current: Optional[Dict[str, np.ndarray]] = None
    i = 0
    while i < len(rows):
        lineno, line = rows[i]
        head, *rest = line.split()
        try:
            if head == "sense":
                sense = rest[0]
            elif head == "block":
                blocks.append(Block(rest[0], int(rest[1]), rest[2] == "complex"))
            elif head == "objective":
                current = objective
            elif head == "equality":
                current = {}
                equalities.append((current, float(rest[0])))
            else:
                blk = next((b for b in blocks if b.label == head), None)
                if blk is None or current is None:
                    raise ValueError(f"unexpected token {head!r}")
                dtype = complex if blk.complex else float
                mat = np.array([[dtype(v) for v in rows[i + 1 + r][1].split()]
                                for r in range(blk.dim)])
                current[head] = mat
                i += blk.dim
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from exc
        i += 1
    return SdpProblem(blocks, objective, equalities, sense)
