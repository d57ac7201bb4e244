import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from updc.analytic_oracles import (N4, W3_MINUS, W3_PLUS, FittingError, ThreePhotonParams,
                                   TwoPhotonParams, f_perp, fit_n2_params, n2_amplitudes,
                                   n3_amplitudes, oracle_n1, oracle_n2, oracle_n3, oracle_n4,
                                   slow_frequency)
from updc.fock_dynamics import SubspaceState, cached_propagator, propagate

TAUS = np.random.default_rng(7).uniform(0.0, 40.0, 1000)


def _numeric(n, start, taus):
    return cached_propagator(n).trajectory(start, taus)


@settings(max_examples=50, deadline=None)
@given(angle=st.floats(0, 2 * math.pi), tau=st.floats(0, 30))
def test_n1_rotation(angle, tau):
    f0, f1 = math.cos(angle), math.sin(angle)
    s = oracle_n1(f0, f1, tau)
    ref = propagate(cached_propagator(1), SubspaceState(1, np.array([f0, f1])), tau)
    np.testing.assert_allclose(s.amplitudes, ref.amplitudes, atol=1e-12)


def test_n1_rejects_unnormalized():
    with pytest.raises(ValueError):
        oracle_n1(1.0, 0.5, 0.1)


def test_n2_vacuum_family():
    params = fit_n2_params(SubspaceState.vacuum(2))
    assert params.m == pytest.approx(1.0) and params.phi0 == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(n2_amplitudes(params, TAUS),
                               _numeric(2, SubspaceState.vacuum(2).amplitudes, TAUS), atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(m=st.floats(-20, 20), phi0=st.floats(-math.pi, math.pi))
def test_n2_family_solves_dynamics(m, phi0):
    params = TwoPhotonParams(m, phi0)
    start = n2_amplitudes(params, 0.0)
    taus = np.array([0.3, 1.7, 9.1])
    np.testing.assert_allclose(n2_amplitudes(params, taus), _numeric(2, start, taus), atol=1e-12)
    back = fit_n2_params(oracle_n2(params, 0.0))
    assert back.m == pytest.approx(m, rel=1e-8, abs=1e-10)
    assert math.cos(back.phi0 - phi0) == pytest.approx(1.0, abs=1e-9)


def test_n2_fit_rejects_family_axis():
    axis = np.array([math.sqrt(2 / 3), 0.0, 1 / math.sqrt(3)])
    with pytest.raises(FittingError):
        fit_n2_params(SubspaceState(2, axis))
    with pytest.raises(ValueError):
        fit_n2_params(SubspaceState.vacuum(3))


def test_n2_complete_conversion_point():
    # after a sign flip at sqrt(6) tau0 = 0.976 the state rejoins the family and
    # reaches |2,2,0> at sqrt(6) tau1 = pi - 0.626
    tau0 = 0.976 / math.sqrt(6)
    s = oracle_n2(fit_n2_params(SubspaceState.vacuum(2)), tau0)
    flipped = SubspaceState(2, s.amplitudes * np.array([1, 1, -1]))
    after = oracle_n2(fit_n2_params(flipped), (math.pi - 0.626) / math.sqrt(6))
    assert after.marked**2 >= 0.999


def test_n3_vacuum_matches_numeric():
    np.testing.assert_allclose(n3_amplitudes(ThreePhotonParams.vacuum(), TAUS),
                               _numeric(3, SubspaceState.vacuum(3).amplitudes, TAUS), atol=1e-12)
    assert oracle_n3(ThreePhotonParams.vacuum(), 0.0).marked == pytest.approx(0.0, abs=1e-15)


def test_n3_frequencies():
    w = np.sort(np.abs(cached_propagator(3).eigenfrequencies))
    np.testing.assert_allclose([W3_PLUS, W3_MINUS], w[[0, 2]], rtol=1e-12)
    assert slow_frequency(3) == W3_PLUS


def test_f_perp():
    s = propagate(cached_propagator(3), SubspaceState.vacuum(3), 0.7)
    f = s.amplitudes
    assert f_perp(s) == pytest.approx(math.hypot(f[1], f[2]))


def test_n4_vacuum_matches_numeric():
    f0, f4 = oracle_n4(TAUS)
    ref = _numeric(4, SubspaceState.vacuum(4).amplitudes, TAUS)
    np.testing.assert_allclose(f0, ref[0], atol=1e-12)
    np.testing.assert_allclose(f4, ref[4], atol=1e-12)
    assert slow_frequency(4) == N4.w_plus
    with pytest.raises(ValueError):
        slow_frequency(5)
