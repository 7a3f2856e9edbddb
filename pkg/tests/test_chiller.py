import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ccwp.chiller import (
    LEGACY,
    SATURATED,
    ChillerInput,
    ChillerParams,
    ChillerState,
    cap_fun_t,
    chiller_power,
    chiller_step,
    chw_pump_power,
    eir_fun_t,
    plr_and_cycling,
)
from ccwp.core import ParameterError

FLAT = ChillerParams(
    qdot_evap_nom=800.0, P_ch_nom=100.0,
    alpha=(1, 0, 0, 0, 0, 0), beta=(1, 0, 0, 0, 0, 0), gamma_plr=(1, 0, 0),
    a_ch=0.0, a_cd=0.0, mdot_chw_nom=31.86, mdot_cd_nom=47.44,
)


@pytest.fixture(scope="module")
def carrier(params):
    return params.chillers[0]


class TestCurves:
    def test_constant(self):
        assert cap_fun_t([1, 0, 0, 0, 0, 0], 3.0, 40.0) == 1.0

    def test_pickoff(self):
        assert cap_fun_t([0, 1, 0, 0, 0, 0], 7.0, 123.0) == 7.0

    def test_cap_hand_value(self):
        assert cap_fun_t([0.9, 0.01, 0, 0.002, 0, 0.0001], 7.0, 30.0) == pytest.approx(1.051)

    def test_eir_mirror(self):
        assert eir_fun_t([1, 0, 0, 0, 0, 0], 3.0, 40.0) == 1.0
        assert eir_fun_t([0, 0, 0, 1, 0, 0], 7.0, 30.0) == 30.0
        # 0.8 + 0.02*7 + 0.001*30 + 0.0002*7*30
        assert eir_fun_t([0.8, 0.02, 0, 0.001, 0, 0.0002], 7.0, 30.0) == pytest.approx(1.012)

    def test_negative_clipped(self):
        assert cap_fun_t([-1, 0, 0, 0, 0, 0], 7.0, 30.0) == 0.0
        assert eir_fun_t([-1, 0, 0, 0, 0, 0], 7.0, 30.0) == 0.0


class TestPartLoad:
    def test_full_load(self):
        assert plr_and_cycling(500.0, 500.0, 0.1, 1.0) == (1.0, 1.0)

    def test_zero_load(self):
        assert plr_and_cycling(0.0, 500.0, 0.1, 1.0) == (0.1, 0.0)

    def test_cycling(self):
        plr, cr = plr_and_cycling(25.0, 500.0, 0.1, 1.0)
        assert plr == 0.1 and cr == pytest.approx(0.5)

    def test_zero_capacity_rejected(self):
        with pytest.raises(ParameterError):
            plr_and_cycling(1.0, 0.0, 0.1, 1.0)


class TestPower:
    def test_cycled_off(self):
        assert chiller_power(FLAT, 7.0, 30.0, 0.5, 0.0) == 0.0

    def test_nominal(self):
        assert chiller_power(FLAT, 7.0, 30.0, 1.0, 1.0) == 100.0

    def test_hand_product(self):
        p = replace(FLAT, alpha=(1.05, 0, 0, 0, 0, 0), beta=(0.95, 0, 0, 0, 0, 0), gamma_plr=(0.9, 0, 0))
        assert chiller_power(p, 7.0, 30.0, 0.7, 1.0) == pytest.approx(89.775)

    def test_pump(self):
        assert chw_pump_power([0, 0, 0, 0], 12.0) == 0.0
        assert chw_pump_power([0, 0, 1, 2], 3.0) == 5.0
        assert chw_pump_power([2, 1, 0.5, 1], 3.0) == pytest.approx(5.2726, abs=1e-4)
        with pytest.raises(ParameterError):
            chw_pump_power([1, -1, 0, 0], 3.0)


def _steady(p, u, x=None, n=2000):
    x = x or ChillerState(u.T_chws_set, 35.0)
    for _ in range(n):
        r = chiller_step(p, x, u)
        if abs(r.next_state.T_chws - x.T_chws) < 1e-12 and abs(r.next_state.T_cdwr - x.T_cdwr) < 1e-12:
            return r
        x = r.next_state
    return r


class TestStep:
    def test_setpoint_above_return_passes_through(self, carrier):
        u = ChillerInput(6.0, 31.86, 29.0, 47.44, 7.0)
        r = chiller_step(carrier, ChillerState(7.0, 33.0), u)
        assert not r.refrigerant_active
        assert (r.qdot_evap, r.qdot_cond, r.P_ch) == (0.0, 0.0, 0.0)
        assert r.next_state == ChillerState(6.0, 29.0)

    def test_setpoint_below_lower_bound_passes_through(self, carrier):
        r = chiller_step(carrier, ChillerState(7.0, 33.0), ChillerInput(12.0, 31.86, 29.0, 47.44, 4.0))
        assert not r.refrigerant_active

    def test_hot_condenser_water_passes_through(self, carrier):
        r = chiller_step(carrier, ChillerState(7.0, 33.0), ChillerInput(12.0, 31.86, 41.0, 47.44, 7.0))
        assert not r.refrigerant_active and r.next_state.T_cdwr == 41.0

    def test_legacy_ignores_condenser_limit_for_operability(self, carrier):
        p = replace(carrier, mode=LEGACY)
        r = chiller_step(p, ChillerState(7.0, 33.0), ChillerInput(12.0, 31.86, 41.0, 47.44, 7.0))
        assert r.refrigerant_active

    def test_tracks_setpoint_at_nominal_flows(self, carrier):
        r = _steady(carrier, ChillerInput(12.0, 31.86, 29.44, 47.44, 7.0))
        assert abs(r.next_state.T_chws - 7.0) < 0.05

    def test_starved_condenser_clamps(self, carrier):
        r = _steady(carrier, ChillerInput(12.0, 31.86, 29.44, 0.1 * 47.44, 7.0))
        assert r.next_state.T_cdwr == pytest.approx(40.0, abs=1e-6)
        assert r.next_state.T_chws > 7.0

    def test_flat_chiller_hand_value(self):
        # instant filters, req = 4.186*31.86*5 = 666.83 kW < 800 kW capacity
        r = chiller_step(FLAT, ChillerState(7.0, 30.0), ChillerInput(12.0, 31.86, 29.0, 47.44, 7.0))
        assert r.qdot_evap == pytest.approx(4.186 * 31.86 * 5.0)
        assert r.next_state.T_chws == pytest.approx(7.0)
        P = 100.0 * min(4.186 * 31.86 * 5.0 / 800.0 / 0.1, 1.0)
        assert r.P_ch == pytest.approx(P)
        assert r.next_state.T_cdwr == pytest.approx(29.0 + (r.qdot_evap + P) / (4.186 * 47.44))

    def test_flat_chiller_capacity_limit(self):
        r = chiller_step(FLAT, ChillerState(7.0, 30.0), ChillerInput(20.0, 31.86, 29.0, 47.44, 7.0))
        assert r.qdot_evap == pytest.approx(800.0)
        assert r.next_state.T_chws == pytest.approx(20.0 - 800.0 / (4.186 * 31.86))

    def test_params_validated(self):
        with pytest.raises(ParameterError):
            replace(FLAT, plr_lb=0.0)
        with pytest.raises(ParameterError):
            replace(FLAT, mode="bogus")


def _random_inputs(rng, p):
    T_chwr = rng.uniform(-10, 60)
    u = ChillerInput(
        T_chwr=T_chwr,
        mdot_chw=rng.uniform(0.01, 2.0) * p.mdot_chw_nom,
        T_cdws=rng.uniform(-10, 60),
        mdot_cd=rng.uniform(0.01, 2.0) * p.mdot_cd_nom,
        T_chws_set=rng.uniform(-10, 60),
    )
    x = ChillerState(rng.uniform(-10, 60), rng.uniform(-10, p.T_cdwr_ub))
    return x, u


def _operable_inputs(rng, p):
    T_chwr = rng.uniform(6, 25)
    u = ChillerInput(
        T_chwr=T_chwr,
        mdot_chw=rng.uniform(0.01, 2.0) * p.mdot_chw_nom,
        T_cdws=rng.uniform(10, p.T_cdwr_ub),
        mdot_cd=rng.uniform(0.01, 2.0) * p.mdot_cd_nom,
        T_chws_set=rng.uniform(p.T_chws_lb, min(T_chwr, 12.0)),
    )
    x = ChillerState(rng.uniform(4, 20), rng.uniform(10, p.T_cdwr_ub))
    return x, u


@pytest.mark.parametrize("draw", [_random_inputs, _operable_inputs])
def test_condenser_bound_fuzz(params, draw):
    rng = np.random.default_rng(11)
    for p in params.chillers:
        for _ in range(5000):
            x, u = draw(rng, p)
            r = chiller_step(p, x, u)
            if u.T_cdws > p.T_cdwr_ub:
                # water that is already too hot passes through untouched
                assert not r.refrigerant_active and r.next_state.T_cdwr == u.T_cdws
            else:
                assert r.next_state.T_cdwr <= p.T_cdwr_ub + 1e-6


def test_energy_bookkeeping(params):
    rng = np.random.default_rng(12)
    for p in params.chillers:
        for _ in range(500):
            x, u = _random_inputs(rng, p)
            r = chiller_step(p, x, u)
            assert r.qdot_evap >= 0 and r.P_ch >= 0 and r.qdot_cond >= 0
            if r.refrigerant_active:
                assert r.qdot_cond - r.qdot_evap == pytest.approx(p.eta1 * r.P_ch, rel=1e-12, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(T_chwr=st.floats(8, 16), T_cdws=st.floats(20, 38), frac=st.floats(0.05, 1.5),
       T_set=st.floats(5, 9), dT=st.floats(0.01, 3))
def test_higher_setpoint_never_more_duty(carrier, T_chwr, T_cdws, frac, T_set, dT):
    x = ChillerState(7.5, 36.0)
    lo = chiller_step(carrier, x, ChillerInput(T_chwr, 31.86, T_cdws, frac * 47.44, T_set))
    hi = chiller_step(carrier, x, ChillerInput(T_chwr, 31.86, T_cdws, frac * 47.44, T_set + dT))
    # both may sit on the condenser edge, located by bisection to ~1e-7 kW
    assert hi.qdot_evap <= lo.qdot_evap + 1e-6
