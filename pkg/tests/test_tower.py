from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccwp.core import ParameterError
from ccwp.tower import (
    CORRELATED,
    NO_COOLING,
    RANGE_SATURATED,
    TowerInput,
    TowerParams,
    TowerState,
    approach_hat,
    coeff_index,
    cw_pump_power,
    liquid_gas_ratio,
    range_polynomial,
    tower_step,
)


def _single(idx, value=1.0, **kw):
    c = [0.0] * 27
    c[idx] = value
    base = dict(mdot_cw_nom=47.44, mdot_oa_nom=47.44, a_ct=0.0, P_ct_nom=15.0)
    base.update(kw)
    return TowerParams(c=tuple(c), **base)


CONST = _single(coeff_index(0, 0, 0), 3.5)


@pytest.fixture(scope="module")
def york(params):
    return params.towers[0]


class TestCorrelation:
    def test_constant(self):
        assert approach_hat(CONST, 9.0, 30.0, 2.0) == 3.5

    def test_wet_bulb_pickoff(self):
        assert approach_hat(_single(coeff_index(1, 0, 0)), 5.0, 25.5, 1.0) == 25.5

    def test_triple_product(self):
        p = _single(coeff_index(1, 1, 1), 0.01)
        assert approach_hat(p, 5.0, 25.0, 1.2) == pytest.approx(1.5)

    def test_index_is_lexicographic(self):
        assert [coeff_index(0, 0, 0), coeff_index(0, 0, 2), coeff_index(0, 1, 0), coeff_index(2, 2, 2)] == [0, 2, 3, 26]

    @given(st.integers(0, 26), st.floats(2, 22), st.floats(-5, 35), st.floats(0.1, 8))
    def test_collapsed_polynomial_agrees(self, idx, r, wb, lgr):
        p = _single(idx, 0.37)
        b0, b1, b2 = range_polynomial(p.c, wb, lgr)
        assert b0 + b1 * r + b2 * r * r == pytest.approx(approach_hat(p, r, wb, lgr), rel=1e-9, abs=1e-9)

    def test_vectorized(self, york):
        r = np.linspace(3, 10, 5)
        v = approach_hat(york, r, 25.0, 1.0)
        assert v.shape == (5,)
        assert v[2] == pytest.approx(approach_hat(york, float(r[2]), 25.0, 1.0))

    def test_york_nominal_approach(self, york):
        # the correlation's own value at the design range and wet-bulb
        assert approach_hat(york, 5.55, 25.5, 1.0) == pytest.approx(3.849, abs=1e-3)


class TestLiquidGasRatio:
    def test_nominal(self):
        assert liquid_gas_ratio(CONST, 47.44, 47.44) == 1.0

    def test_ratio(self):
        assert liquid_gas_ratio(CONST, 2 * 47.44, 0.5 * 47.44) == pytest.approx(4.0)

    def test_clamped(self):
        assert liquid_gas_ratio(CONST, 10 * 47.44, 0.5 * 47.44) == 8.0

    def test_zero_air(self):
        with pytest.raises(ParameterError):
            liquid_gas_ratio(CONST, 47.44, 0.0)


class TestStep:
    def test_case_1_small_scope(self, york):
        r = tower_step(york, TowerState(25.0), TowerInput(26.0, 47.44, 47.44), 25.5)
        assert r.case == NO_COOLING and r.next_state.T_cws == 26.0 and r.T_ran == 0.0

    def test_case_1_fan_off(self, york):
        r = tower_step(york, TowerState(25.0), TowerInput(35.0, 47.44, 0.0), 25.5)
        assert r.case == NO_COOLING and r.next_state.T_cws == 35.0 and r.P_ct == 0.0

    def test_case_2_range_saturated(self, york):
        r = tower_step(york, TowerState(60.0), TowerInput(95.0, 47.44, 47.44), 20.0)
        assert r.case == RANGE_SATURATED
        assert r.next_state.T_cws == pytest.approx(72.8)

    def test_case_3_constant_approach(self):
        r = tower_step(CONST, TowerState(28.0), TowerInput(35.0, 47.44, 47.44), 25.0)
        assert r.case == CORRELATED
        assert r.T_ran == pytest.approx(6.5, abs=1e-6)
        assert r.T_app == pytest.approx(3.5, abs=1e-6)
        assert r.next_state.T_cws == pytest.approx(28.5, abs=1e-6)

    def test_case_3_is_filtered(self):
        p = replace(CONST, a_ct=0.5)
        r = tower_step(p, TowerState(30.0), TowerInput(35.0, 47.44, 47.44), 25.0)
        assert r.next_state.T_cws == pytest.approx(0.5 * 30.0 + 0.5 * 28.5, abs=1e-6)

    def test_nominal_point(self, york):
        r = tower_step(york, TowerState(29.0), TowerInput(35.0, york.mdot_cw_nom, york.mdot_oa_nom), 25.5)
        assert r.case == CORRELATED
        assert abs(r.T_app - 3.88) <= 0.3 and abs(r.T_ran - 5.55) <= 0.3

    def test_heat_rejection_uses_current_state(self):
        r = tower_step(CONST, TowerState(30.0), TowerInput(35.0, 10.0, 47.44), 25.0)
        assert r.qdot_ct == pytest.approx(4.186 * 10.0 * 5.0)

    def test_heat_rejection_not_negative(self):
        r = tower_step(CONST, TowerState(36.0), TowerInput(35.0, 10.0, 47.44), 25.0)
        assert r.qdot_ct == 0.0

    def test_fan_cubic_law(self, york):
        full = tower_step(york, TowerState(29.0), TowerInput(35.0, 47.44, 47.44), 25.5)
        half = tower_step(york, TowerState(29.0), TowerInput(35.0, 47.44, 23.72), 25.5)
        assert half.P_ct == full.P_ct / 8

    def test_params_validated(self):
        with pytest.raises(ParameterError):
            TowerParams(c=(0.0,) * 26, mdot_cw_nom=1, mdot_oa_nom=1, a_ct=0, P_ct_nom=1)
        with pytest.raises(ParameterError):
            replace(CONST, T_ran_lb=30.0)


class TestPump:
    def test_forms(self):
        assert cw_pump_power([0, 0, 0, 0], 50.0) == 0.0
        assert cw_pump_power([0, 0, 1, 2], 3.0) == 5.0
        assert cw_pump_power([2, 1, 0.5, 1], 3.0) == pytest.approx(5.2726, abs=1e-4)


@settings(max_examples=300, deadline=None)
@given(st.floats(10, 60), st.floats(0, 30), st.floats(0.05, 2), st.floats(0.05, 1.2))
def test_range_within_bounds(york, T_cwr, T_oawb, fr_w, fr_a):
    r = tower_step(york, TowerState(29.0), TowerInput(T_cwr, fr_w * 47.44, fr_a * 47.44), T_oawb)
    assert 0.0 <= r.T_ran <= york.T_ran_ub
    if r.case == CORRELATED:
        target = T_cwr - r.T_ran
        assert T_oawb - 1e-9 <= target <= T_cwr
