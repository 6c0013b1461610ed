import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from instances import random_overlaps
from sdiqrng.qstates import (InfeasibleOverlaps, OverlapBounds, Povm, PureState,
                             a_lower_bound, equiprobable_theta, min_inconclusive,
                             overlap_feasible, overlaps_of, qubit_ensemble,
                             qubit_ensemble_from_overlaps, qubit_test_states,
                             stats_from_povm, support_nulling_tilde, tilde_states,
                             usd_povm)

phis = st.floats(0.0, math.pi / 2)


@settings(max_examples=100)
@given(phis)
def test_usd_zero_error_and_complete(phi):
    povm = usd_povm(phi)
    psi0, psi1 = qubit_test_states(phi)
    p0, p1 = povm.probabilities(psi0), povm.probabilities(psi1)
    assert abs(p0[1]) < 1e-12 and abs(p1[0]) < 1e-12
    np.testing.assert_allclose(sum(povm.elements), np.eye(2), atol=1e-12)
    for e in povm.elements:
        assert np.linalg.eigvalsh(e).min() > -1e-10


@settings(max_examples=50)
@given(phis)
def test_usd_success_is_optimal(phi):
    # conclusive rate 1 - cos(phi) is the Ivanovic-Dieks-Peres value
    povm = usd_povm(phi)
    psi0, _ = qubit_test_states(phi)
    assert povm.probabilities(psi0)[0] == pytest.approx(1 - math.cos(phi), abs=1e-12)


def test_usd_orthogonal_states_projective():
    povm = usd_povm(math.pi / 2)
    assert np.allclose(povm.elements[2], 0.0, atol=1e-15)


def test_usd_rejects_out_of_range():
    with pytest.raises(ValueError):
        usd_povm(2.0)


def test_equiprobable_point():
    phi = math.acos(0.5)
    theta = equiprobable_theta(phi)
    assert math.cos(theta) == pytest.approx(0.0, abs=1e-15)
    ens = qubit_ensemble(phi, theta)
    p = usd_povm(phi).probabilities(ens.states[2])
    np.testing.assert_allclose(p, [1 / 3] * 3, atol=1e-12)


@settings(max_examples=50)
@given(st.floats(0.2, 1.0))
def test_equiprobable_whole_range(cphi):
    phi = math.acos(cphi)
    ens = qubit_ensemble(phi, equiprobable_theta(phi))
    np.testing.assert_allclose(usd_povm(phi).probabilities(ens.states[2]), [1 / 3] * 3,
                               atol=1e-10)


def test_equiprobable_needs_cos_phi_above_fifth():
    with pytest.raises(InfeasibleOverlaps):
        equiprobable_theta(math.acos(0.19))


def test_min_inconclusive():
    assert min_inconclusive(0.5, 0.5, math.acos(0.5)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        min_inconclusive(0.7, 0.7, 0.3)


def test_a_bound_operating_point():
    d = OverlapBounds(math.exp(-0.16), 0.7775556981522, 0.7775556981522)
    assert a_lower_bound(d) == pytest.approx(0.6529, abs=1e-4)


def test_a_bound_states_in_plane():
    # third state in the span of the first two: a = 1
    ens = qubit_ensemble(0.9, 1.3)
    d = overlaps_of(ens)
    a_raw = (d.d02**2 + d.d12**2 - 2 * d.d01 * d.d02 * d.d12) / (1 - d.d01**2)
    assert a_raw <= 1 + 1e-12
    assert a_lower_bound(d) <= 1.0


def test_a_bound_degenerate():
    with pytest.raises(ValueError):
        a_lower_bound(OverlapBounds(1.0, 0.5, 0.5))


def test_a_bound_infeasible():
    with pytest.raises(InfeasibleOverlaps):
        a_lower_bound(OverlapBounds(0.0, 0.9, 0.9))


def test_feasibility_condition():
    assert overlap_feasible(OverlapBounds(0.5, 0.5, 0.5))
    assert not overlap_feasible(OverlapBounds(0.0, 0.9, 0.9))


@settings(max_examples=1000)
@given(st.integers(0, 2**32 - 1))
def test_tilde_round_trip(seed):
    d = random_overlaps(np.random.default_rng(seed))
    ens = tilde_states(d)
    g = np.abs(ens.gram())
    np.testing.assert_allclose([g[0, 1], g[0, 2], g[1, 2]], d.as_tuple(), atol=1e-9)
    np.testing.assert_allclose(np.diag(g), 1.0, atol=1e-12)


def test_tilde_rejects_infeasible():
    with pytest.raises(InfeasibleOverlaps):
        tilde_states(OverlapBounds(0.0, 0.9, 0.9))


def test_tilde_third_component_vanishes_at_support_nulling():
    d01 = 0.6
    d = support_nulling_tilde(d01)
    ens = tilde_states(OverlapBounds(d01, d, d))
    assert abs(ens.states[2].amplitudes[2]) < 1e-6


def test_qubit_ensemble_from_overlaps():
    ens = qubit_ensemble(math.acos(0.5), equiprobable_theta(math.acos(0.5)))
    d = overlaps_of(ens)
    back = overlaps_of(qubit_ensemble_from_overlaps(d))
    assert back.d01 == pytest.approx(d.d01, abs=1e-12)
    assert back.d02**2 + back.d12**2 == pytest.approx(d.d02**2 + d.d12**2, abs=1e-12)


def test_pure_state_validation():
    with pytest.raises(ValueError):
        PureState(np.array([1.0, 1.0]))
    with pytest.raises(ValueError):
        PureState(np.ones(4) / 2)


def test_povm_validation():
    with pytest.raises(ValueError):
        Povm((np.eye(2), np.eye(2)))
    with pytest.raises(ValueError):
        Povm((np.diag([1.5, 0.5]), np.diag([-0.5, 0.5])))


def test_stats_from_povm_columns_sum_to_one():
    ens = tilde_states(OverlapBounds(0.8, 0.7, 0.6))
    p = stats_from_povm(ens, [np.eye(3) / 3] * 3)
    np.testing.assert_allclose(p, 1 / 3, atol=1e-14)
