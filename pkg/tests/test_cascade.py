import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from updc.cascade import (UNIT_CELL_TAU0, UNIT_CELL_TAU1, CascadeSpec, NsgModel,
                          nondeterministic_penalty, plan_cascade, verify_unit_cell)


def test_single_level():
    r = plan_cascade(CascadeSpec(1))
    assert (r.unit_cell_count, r.signal_photons, r.idler_photons, r.output_spatial_modes) == (1, 2, 2, 1)
    assert r.overall_success_probability == 1.0 and r.total_ancillae == 0


def test_three_levels_deterministic():
    r = plan_cascade(CascadeSpec(3))
    assert r.signal_photons == r.idler_photons == 8
    assert r.unit_cell_count == 7 and r.output_spatial_modes == 4
    assert r.overall_success_probability == 1.0


def test_postselected_gate_probability_and_ancillae():
    r = plan_cascade(CascadeSpec(2, NsgModel.nondeterministic(0.25)))
    assert r.overall_success_probability == 0.25**3 == 0.015625
    assert r.total_ancillae == 6


@given(K=st.integers(1, 29), p=st.floats(0.01, 0.99))
def test_doubling_and_monotone_success(K, p):
    nsg = NsgModel.nondeterministic(p)
    a, b = plan_cascade(CascadeSpec(K, nsg)), plan_cascade(CascadeSpec(K + 1, nsg))
    assert b.signal_photons == 2 * a.signal_photons
    assert b.unit_cell_count == 2**(K + 1) - 1
    assert b.overall_success_probability <= a.overall_success_probability
    assert plan_cascade(CascadeSpec(K)).overall_success_probability == 1.0


def test_spec_validation():
    for K in (0, -1, 31, 1.5, True):
        with pytest.raises(ValueError):
            CascadeSpec(K)
    assert plan_cascade(CascadeSpec(35, max_levels=40)).unit_cell_count == 2**35 - 1
    with pytest.raises(ValueError):
        NsgModel("deterministic", 0.5)
    with pytest.raises(ValueError):
        NsgModel.nondeterministic(0.0)
    with pytest.raises(ValueError):
        NsgModel.nondeterministic(0.5, -1)
    with pytest.raises(ValueError):
        NsgModel("magic")


def test_penalty():
    assert nondeterministic_penalty(4) == 1 / 256
    assert nondeterministic_penalty(9) == pytest.approx((1 / 81) ** 3, rel=1e-15)
    assert nondeterministic_penalty(2) == pytest.approx(0.25 ** math.sqrt(2))
    with pytest.raises(ValueError):
        nondeterministic_penalty(1)


def test_unit_cell():
    assert verify_unit_cell()
    assert not verify_unit_cell(UNIT_CELL_TAU0, UNIT_CELL_TAU1 + 0.3)
    assert not verify_unit_cell(0.0, 0.0)


def test_report_json_round_trip():
    r = plan_cascade(CascadeSpec(2))
    assert json.loads(r.to_json()) == r.to_dict()
