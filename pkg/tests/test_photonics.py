import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdiqrng.photonics import (DetectorConfig, SourceConfig, event_probabilities,
                               misc_error_probability, overlaps_from_amplitudes)
from sdiqrng.stats import ConditionalStats

amps = st.floats(0.0, 1.5)
dets = st.builds(DetectorConfig, eta=st.floats(0.0, 1.0), p_dc=st.floats(0.0, 0.1))


def test_overlaps_operating_point():
    d = overlaps_from_amplitudes(SourceConfig(0.4, 0.66, 0.66))
    assert d.d01 == pytest.approx(math.exp(-0.16), abs=1e-15)
    assert d.d01 == pytest.approx(0.8521, abs=1e-4)
    assert d.d02 == pytest.approx(0.7776, abs=1e-4)
    assert d.d12 == pytest.approx(d.d02, abs=1e-15)


def test_overlaps_special_cases():
    assert overlaps_from_amplitudes(SourceConfig(0.0, 0.3, 0.3)).d01 == 1.0
    assert overlaps_from_amplitudes(SourceConfig(0.5, 0.5, 0.0)).d02 == pytest.approx(1.0)


def test_ideal_detector_x0():
    p = event_probabilities(SourceConfig(alpha=0.4), DetectorConfig.ideal()).probs
    assert p[0, 0] == pytest.approx(1 - math.exp(-0.16), abs=1e-15)
    assert p[1, 0] == 0.0
    assert p[2, 0] == pytest.approx(math.exp(-0.16), abs=1e-15)


def test_vacuum_x0():
    p = event_probabilities(SourceConfig(alpha=0.0), DetectorConfig.ideal()).probs
    assert p[2, 0] == 1.0
    det = DetectorConfig(p_dc=1e-3)
    p = event_probabilities(SourceConfig(alpha=0.0), det).probs
    assert p[2, 0] == pytest.approx((1 - 1e-3) ** 2, abs=1e-15)


def test_x2_operating_point():
    q = (1 - 1e-6) * math.exp(-0.94 * 0.4356)
    p = event_probabilities(SourceConfig(), DetectorConfig()).probs
    assert p[0, 2] == pytest.approx(q * (1 - q) + 0.5 * (1 - q) ** 2, abs=1e-15)
    assert p[0, 2] == p[1, 2]


@settings(max_examples=200)
@given(amps, amps, amps, dets)
def test_column_stochastic(a, b0, b1, det):
    p = event_probabilities(SourceConfig(a, b0, b1), det).probs
    np.testing.assert_allclose(p.sum(axis=0), 1.0, atol=1e-12)
    assert np.all(p >= 0)


@settings(max_examples=100)
@given(amps, amps, dets)
def test_symmetry(a, b, det):
    p = event_probabilities(SourceConfig(a, b, b), det).probs
    assert p[0, 2] == p[1, 2]


def test_p20_decreases_in_alpha():
    det = DetectorConfig()
    grid = np.linspace(0.0, 1.5, 61)
    p20 = [event_probabilities(SourceConfig(alpha=a), det).probs[2, 0] for a in grid]
    assert np.all(np.diff(p20) < 0)


@settings(max_examples=100)
@given(amps, amps, amps, dets)
def test_x2_independent_of_alpha(a1, a2, b, det):
    p1 = event_probabilities(SourceConfig(a1, b, b), det).column(2)
    p2 = event_probabilities(SourceConfig(a2, b, b), det).column(2)
    np.testing.assert_array_equal(p1, p2)


def test_misc_error():
    assert misc_error_probability(event_probabilities(SourceConfig(), DetectorConfig.ideal())) == 0
    e = misc_error_probability(event_probabilities(SourceConfig(), DetectorConfig()))
    assert 0 < e < 1e-5
    eps = 1e-3
    probs = np.array([[0.3, eps, 0.3], [eps, 0.3, 0.3], [0.7 - eps, 0.7 - eps, 0.4]])
    assert misc_error_probability(ConditionalStats(probs), (0.5, 0.5)) == pytest.approx(eps)


def test_config_validation():
    with pytest.raises(ValueError):
        SourceConfig(alpha=-0.1)
    with pytest.raises(ValueError):
        SourceConfig(priors=(0.5, 0.5, 0.0))
    with pytest.raises(ValueError):
        DetectorConfig(g=(0.6, 0.6, 0.0))
    with pytest.raises(ValueError):
        DetectorConfig(eta=1.2)
