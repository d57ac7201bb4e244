import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from updc.fock_dynamics import SubspaceState, cached_propagator, propagate
from updc.grover import (GroverConfig, PerIteration, PumpSpectrum, SingleCrystal, efficiency_mu_n,
                         efficiency_mu_total, grover_angle, nsg_apply, run_pipeline, termination_M)

TAU0 = 0.976 / math.sqrt(6)
TAU1 = (math.pi - 0.626) / math.sqrt(6)


def test_nsg_flips_only_marked_and_is_involution():
    s = propagate(cached_propagator(3), SubspaceState.vacuum(3), 0.9)
    flipped = nsg_apply(s)
    np.testing.assert_array_equal(flipped.amplitudes[:-1], s.amplitudes[:-1])
    assert flipped.marked == -s.marked
    np.testing.assert_array_equal(nsg_apply(flipped).amplitudes, s.amplitudes)


def test_efficiency_bounds_and_extremes():
    assert efficiency_mu_n(SubspaceState.vacuum(4)) == 0.0
    full = np.zeros(5)
    full[4] = 1.0
    assert efficiency_mu_n(SubspaceState(4, full)) == 1.0
    with pytest.raises(ValueError):
        efficiency_mu_n(SubspaceState.vacuum(0))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 30), tau=st.floats(0, 20))
def test_efficiency_in_unit_interval(n, tau):
    mu = efficiency_mu_n(propagate(cached_propagator(n), SubspaceState.vacuum(n), tau))
    assert -1e-12 <= mu <= 1 + 1e-12


def test_pump_mixture():
    spec = PumpSpectrum({1: 0.5, 2: 0.5})
    one = np.array([0.0, 1.0])
    states = {1: SubspaceState(1, one), 2: SubspaceState.vacuum(2)}
    # converted photons / mean photons = (0.5 * 1) / 1.5
    assert efficiency_mu_total(spec, states) == pytest.approx(1 / 3)
    with pytest.raises(KeyError):
        efficiency_mu_total(spec, {1: states[1]})
    with pytest.raises(ValueError):
        efficiency_mu_total(PumpSpectrum({0: 1.0}), {})
    with pytest.raises(ValueError):
        PumpSpectrum({1: 0.7})
    with pytest.raises(ValueError):
        PumpSpectrum({-1: 1.0})


def test_worked_two_photon_example():
    trace = run_pipeline(GroverConfig(2, TAU0, SingleCrystal(TAU1, 1)))
    assert [s.kind for s in trace.stages] == ["init", "flip", "rotate"]
    assert trace.f_n_sq >= 0.999
    theta = grover_angle(trace)
    assert theta[-1] == pytest.approx(math.pi, abs=0.07)


def test_zero_iterations_equals_plain_propagation():
    trace = run_pipeline(GroverConfig(5, 0.8))
    ref = propagate(cached_propagator(5), SubspaceState.vacuum(5), 0.8)
    assert len(trace.stages) == 1
    np.testing.assert_array_equal(trace.final.amplitudes, ref.amplitudes)


def test_schedules_agree():
    a = run_pipeline(GroverConfig(4, 0.3, SingleCrystal(0.9, 3)))
    b = run_pipeline(GroverConfig(4, 0.3, PerIteration([0.9, 0.9, 0.9])))
    np.testing.assert_array_equal(a.final.amplitudes, b.final.amplitudes)
    assert len(a.outputs) == 4


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 20), taus=st.lists(st.floats(0.01, 5), min_size=1, max_size=6))
def test_pipeline_preserves_norm(n, taus):
    f = run_pipeline(GroverConfig(n, taus[0], PerIteration(taus[1:]))).final.amplitudes
    assert abs(f @ f - 1) <= 1e-10


def test_config_validation():
    with pytest.raises(ValueError):
        GroverConfig(0, 0.1)
    with pytest.raises(ValueError):
        GroverConfig(2, 0.0)
    with pytest.raises(ValueError):
        GroverConfig(2, 0.1, PerIteration([0.2, -0.1]))
    with pytest.raises(ValueError):
        GroverConfig(2, 0.1, SingleCrystal(0.2, 3), iteration_cap=2)


@pytest.mark.parametrize("M", range(0, 12))
def test_termination_count_at_boundary(M):
    theta = math.pi / (2 * M + 1)
    assert termination_M(theta) == M
    if M > 0:
        assert termination_M(theta * (1 + 1e-6)) == M - 1


@settings(max_examples=100)
@given(theta=st.floats(1e-4, math.pi))
def test_termination_count_definition(theta):
    M = termination_M(theta)
    assert (2 * M + 1) * theta <= math.pi * (1 + 1e-12)
    assert (2 * M + 3) * theta > math.pi


def test_termination_domain():
    with pytest.raises(ValueError):
        termination_M(0.0)
    with pytest.raises(ValueError):
        termination_M(4.0)
