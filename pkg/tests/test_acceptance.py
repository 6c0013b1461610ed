"""Acceptance criteria at their stated tolerances, one verdict line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
repeated under "acceptance criteria" in the terminal summary.
"""

import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import brentq

from instances import random_instance, random_overlaps, real_qubit_ensemble
from oracles import grid_povms, lp_guessing, responses
from sdiqrng.finitesize import FiniteSizeParams, TradeoffFunction, aep_rate, eat_rate
from sdiqrng.guessing import guessing_probability
from sdiqrng.photonics import DetectorConfig, SourceConfig, event_probabilities, overlaps_from_amplitudes
from sdiqrng.qstates import OverlapBounds, a_lower_bound, qubit_test_states, tilde_states, usd_povm
from sdiqrng.radau import gauss_radau
from sdiqrng.report import CertifyOptions, certify
from sdiqrng.seesaw import SeesawOptions, shannon_bound
from sdiqrng.simulator import RunConfig, simulate
from sdiqrng.stats import ConditionalStats

CORPUS = Path(__file__).parent / "data" / "corpus.json"
SOURCE = SourceConfig(alpha=0.4, beta0=0.66, beta1=0.66)
DETECTOR = DetectorConfig(eta=0.94, p_dc=1e-6)


@pytest.fixture(scope="module")
def model():
    """Model probabilities at the operating point, certified at m = 8."""
    stats = event_probabilities(SOURCE, DETECTOR)
    ens = tilde_states(overlaps_from_amplitudes(SOURCE))
    hmin = guessing_probability(stats, ens).min_entropy
    s_star = shannon_bound(stats, ens, gauss_radau(8)).s_star
    return stats, hmin, s_star


def rates(model, n):
    stats, hmin, s_star = model
    p = FiniteSizeParams(n, epsilon=1e-8, epsilon_ext=1e-8)
    return (aep_rate(s_star, stats.column(2), p, hmin),
            eat_rate(TradeoffFunction.constant(s_star), p))


def test_criterion_1_operating_point(model, verdict):
    rec = simulate(RunConfig(SOURCE, DETECTOR, n_rounds=10**6, seed=0))
    ens = tilde_states(overlaps_from_amplitudes(SOURCE))
    hmin_sampled = guessing_probability(rec.stats(), ens).min_entropy
    aep, eat = rates(model, 1e7)
    checks = {"hmin": abs(hmin_sampled - 1.11) <= 0.05,
              "aep": abs(aep - 1.322) <= 0.03,
              "eat": abs(eat - 1.319) <= 0.03}
    ok = verdict(1, all(checks.values()),
                 f"H_min(N=1e6 sampled)={hmin_sampled:.4f} [1.11+-0.05] "
                 f"AEP(1e7)={aep:.4f} [1.322+-0.03] EAT(1e7)={eat:.4f} [1.319+-0.03]")
    assert ok, checks


def test_criterion_2_crossover(model, verdict):
    _, hmin, _ = model
    below = rates(model, 1e4)[1] < hmin
    grid = np.logspace(math.log10(7.6e4), 12, 300)
    above = all(rates(model, n)[1] > hmin for n in grid)
    cross = brentq(lambda lg: rates(model, 10**lg)[1] - hmin, 4, math.log10(7.6e4))
    ok = verdict(2, below and above,
                 f"EAT<H_min at 1e4: {below}; EAT>H_min on [7.6e4, 1e12]: {above}; "
                 f"crossover N={10**cross:.3g}")
    assert ok


def test_criterion_3_aep_eat_convergence(model, verdict):
    gap7 = abs(np.subtract(*rates(model, 1e7)))
    gap10 = abs(np.subtract(*rates(model, 1e10)))
    ok = verdict(3, gap7 <= 0.01 and gap10 <= 1e-3,
                 f"|AEP-EAT| at 1e7={gap7:.2e} [<=1e-2], at 1e10={gap10:.2e} [<=1e-3]")
    assert ok


def test_criterion_4_semi_di_bound(verdict):
    a = a_lower_bound(overlaps_from_amplitudes(SOURCE))
    ok = verdict(4, abs(a - 0.66) <= 0.01, f"a_lower_bound={a:.5f} [0.66+-0.01]")
    assert ok


def _quadrature_exact(rng):
    worst = 0.0
    for m in (2, 4, 8, 16):
        rule = gauss_radau(m)
        for _ in range(20):
            coef = rng.integers(-9, 10, size=2 * m - 1).astype(float)
            exact = float(np.sum(coef / np.arange(1, 2 * m)))
            got = rule.integrate(lambda t: np.polynomial.polynomial.polyval(t, coef))
            worst = max(worst, abs(got - exact) / max(1.0, np.abs(coef).sum()))
    return worst <= 1e-12, f"quadrature worst rel err {worst:.1e}"


def _usd(rng):
    worst = 0.0
    for phi in rng.uniform(0.0, math.pi / 2, 100):
        povm = usd_povm(phi)
        psi0, psi1 = qubit_test_states(phi)
        worst = max(worst, abs(povm.probabilities(psi0)[1]), abs(povm.probabilities(psi1)[0]),
                    np.abs(sum(povm.elements) - np.eye(2)).max(),
                    max(-np.linalg.eigvalsh(e).min() for e in povm.elements))
    return worst <= 1e-10, f"USD worst violation {worst:.1e}"


def _tilde(rng):
    worst = 0.0
    for _ in range(1000):
        d = random_overlaps(rng)
        g = np.abs(tilde_states(d).gram())
        worst = max(worst, np.abs(np.array([g[0, 1], g[0, 2], g[1, 2]]) - d.as_tuple()).max())
    return worst <= 1e-9, f"tilde round-trip worst {worst:.1e}"


def _descent(rng):
    violations, worst = 0, -np.inf
    for i in range(20):
        ens, stats = random_instance(rng)
        res = shannon_bound(stats, ens, gauss_radau(4), opts=SeesawOptions(restarts=1, seed=i))
        violations += res.descent_violations
        worst = max(worst, float(np.max(np.diff(res.trajectory), initial=-np.inf)))
    return violations == 0 and worst <= 1e-7, f"descent violations {violations}"


def _pg_bounds(rng):
    bad = 0
    for _ in range(100):
        ens, stats = random_instance(rng)
        pg = guessing_probability(stats, ens).p_guess
        bad += not (stats.column(2).max() - 1e-7 <= pg <= 1.0 + 1e-9)
    return bad == 0, f"p_g out of bounds {bad}/100"


def _oracle():
    grid = grid_povms(72)
    worst = 0.0
    for seed in range(10):
        rng = np.random.default_rng(1000 + seed)
        ens = real_qubit_ensemble(rng.uniform(0.3, 1.4), rng.uniform(0.0, math.pi))
        resp = responses(ens, grid)
        pick = rng.choice(len(grid), size=3, replace=False)
        probs = np.einsum("j,jbx->bx", rng.dirichlet(np.ones(3)), resp[pick])
        sdp = guessing_probability(ConditionalStats(probs), ens, dim=2).p_guess
        worst = max(worst, abs(sdp - lp_guessing(resp, probs)))
    return worst <= 2e-3, f"oracle worst |diff| {worst:.2e}"


def test_criterion_5_property_suites(verdict):
    rng = np.random.default_rng(20240501)
    parts = [_quadrature_exact(rng), _usd(rng), _tilde(rng), _descent(rng), _pg_bounds(rng),
             _oracle()]
    ok = verdict(5, all(p[0] for p in parts), "; ".join(p[1] for p in parts))
    assert ok


def test_criterion_6_ordering_on_corpus(verdict):
    corpus = json.loads(CORPUS.read_text())
    failures = []
    for entry in corpus:
        rep = certify(ConditionalStats(entry["probs"]), OverlapBounds(*entry["overlaps"]),
                      FiniteSizeParams(entry["n_rounds"]), CertifyOptions(dim=entry["dim"]))
        if not (rep.s_star >= rep.hmin - 1e-3 and rep.aep <= rep.s_star
                and rep.eat <= rep.s_star):
            failures.append(f"{entry['name']} (S*={rep.s_star:.4f}, H_min={rep.hmin:.4f}, "
                            f"AEP={rep.aep:.4f}, EAT={rep.eat:.4f})")
    ok = verdict(6, not failures, f"{len(corpus) - len(failures)}/{len(corpus)} instances ordered"
                 + (f"; failing: {', '.join(failures)}" if failures else ""))
    assert ok, failures


def _cli(*argv):
    return subprocess.run([sys.executable, "-m", "sdiqrng.cli", *argv],
                          capture_output=True, check=True).stdout


def test_criterion_7_determinism(tmp_path, verdict):
    sim = [_cli("simulate", "--seed", "0", "--n-rounds", "1000000") for _ in range(2)]
    rec = tmp_path / "record.json"
    rec.write_bytes(sim[0])
    cert = [_cli("certify", str(rec), "--seesaw-seed", "0") for _ in range(2)]
    ok = verdict(7, sim[0] == sim[1] and cert[0] == cert[1],
                 f"simulate identical: {sim[0] == sim[1]}; certify identical: {cert[0] == cert[1]}")
    assert ok
