import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdiqrng.finitesize import (ALPHA_GRID, FiniteSizeParams, TradeoffFunction, aep_delta,
                                aep_eta, aep_rate, best_alpha, eat_correction, eat_k_prime,
                                eat_rate, eat_v, extractable_bits, g_smoothing, max_entropy,
                                rate_table)

S_STAR = 1.379328
HMIN = 1.18119
PX2 = [0.30, 0.30, 0.40]


def test_v_constant_tradeoff():
    v = eat_v(TradeoffFunction.constant(1.3), 3)
    assert v == pytest.approx(math.log2(19) + math.sqrt(2), abs=1e-14)
    assert v == pytest.approx(5.6621, abs=1e-4)


def test_max_entropy():
    assert max_entropy([1 / 3] * 3) == pytest.approx(math.log2(3), abs=1e-14)
    assert max_entropy([1.0, 0.0, 0.0]) == 0.0
    assert max_entropy([0.5, 0.5, 0.0]) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=100)
@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_aep_eta_at_least_two(hmin, hmax):
    # eta >= sqrt(2^-hmin) + 1 + 1 with hmax >= 0
    assert aep_eta(hmin, hmax) >= 2.0


def test_aep_delta_formula():
    eta = aep_eta(HMIN, max_entropy(PX2))
    expect = 4 * math.log2(eta) * math.sqrt(math.log2(2 / 1e-16))
    assert aep_delta(1e-8, eta) == pytest.approx(expect, rel=1e-14)


@pytest.mark.parametrize("eps", [1e-2, 1e-8, 1e-15, 1e-100])
def test_g_smoothing_high_precision(eps):
    mpmath.mp.dps = 400
    e = mpmath.mpf(eps)
    exact = -mpmath.log(1 - mpmath.sqrt(1 - e * e), 2)
    assert g_smoothing(eps) == pytest.approx(float(exact), rel=1e-13)


def test_k_prime_pole():
    f = TradeoffFunction.constant(1.0)
    assert eat_k_prime(1.5, f, 3) == math.inf
    assert math.isfinite(eat_k_prime(1.4999, f, 3))
    assert eat_k_prime(1.4, f, 3) > eat_k_prime(1.1, f, 3) > 0


def test_alpha_grid():
    assert len(ALPHA_GRID) == 200
    assert ALPHA_GRID[0] == pytest.approx(1 + 1e-6)
    assert ALPHA_GRID[-1] == pytest.approx(1.5)
    assert np.all(np.diff(ALPHA_GRID) > 0)


def test_best_alpha_is_grid_minimum():
    f = TradeoffFunction.constant(S_STAR)
    p = FiniteSizeParams(1e7)
    a = best_alpha(f, p)
    assert eat_correction(a, f, p) == min(eat_correction(x, f, p) for x in ALPHA_GRID)
    assert best_alpha(f, FiniteSizeParams(1e7, alpha_renyi=1.01)) == 1.01


@pytest.mark.parametrize("n", [1e3, 1e5, 1e7, 1e10])
def test_rates_below_asymptote(n):
    p = FiniteSizeParams(n)
    assert 0.0 <= aep_rate(S_STAR, PX2, p, HMIN) <= S_STAR
    assert 0.0 <= eat_rate(TradeoffFunction.constant(S_STAR), p) <= S_STAR


def test_rates_converge():
    p = FiniteSizeParams(1e12)
    assert aep_rate(S_STAR, PX2, p, HMIN) == pytest.approx(S_STAR, abs=1e-4)
    assert eat_rate(TradeoffFunction.constant(S_STAR), p) == pytest.approx(S_STAR, abs=1e-4)


def test_rates_monotone_in_rounds():
    rows = rate_table(S_STAR, HMIN, PX2, np.logspace(3, 12, 40), FiniteSizeParams(1e3))
    for key in ("aep", "eat"):
        vals = np.array([getattr(r, key) for r in rows])
        assert np.all(np.diff(vals) >= -1e-12)
    assert [r.n_rounds for r in rows] == sorted(r.n_rounds for r in rows)


def test_small_n_floors_at_zero():
    p = FiniteSizeParams(100)
    assert aep_rate(S_STAR, PX2, p, HMIN) == 0.0
    assert eat_rate(TradeoffFunction.constant(S_STAR), p) == 0.0


def test_extractor_penalty():
    p = FiniteSizeParams(1e7)
    full = extractable_bits(1e7 * 1.32, p)
    assert 1e7 * 1.32 - full.bits == pytest.approx(53.15, abs=5e-3)
    assert full.per_round == pytest.approx(1.32 - 5.3e-6, abs=1e-7)
    assert full.epsilon_total == pytest.approx(5e-8)
    assert extractable_bits(10.0, p).bits == 0.0


def test_validation():
    with pytest.raises(ValueError):
        FiniteSizeParams(0)
    with pytest.raises(ValueError):
        FiniteSizeParams(1e6, epsilon=0.0)
    with pytest.raises(ValueError):
        FiniteSizeParams(1e6, pr_omega=1.5)
    with pytest.raises(ValueError):
        FiniteSizeParams(1e6, alpha_renyi=2.0)
    with pytest.raises(ValueError):
        TradeoffFunction(2.0, 1.5, 1.0)
    with pytest.raises(ValueError):
        aep_rate(-0.1, PX2, FiniteSizeParams(1e6), HMIN)
    with pytest.raises(ValueError):
        extractable_bits(-1.0, FiniteSizeParams(1e6))
