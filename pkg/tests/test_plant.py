from dataclasses import replace

import numpy as np
import pytest

from ccwp.chiller import ChillerInput, chiller_step
from ccwp.controllers import make_input
from ccwp.core import FeasibilityError
from ccwp.loops import ChwLoopInput, CwLoopInput
from ccwp.plant import (
    PlantDisturbance,
    PlantInput,
    check_inputs,
    plant_step,
    plantwide_cop,
)
from ccwp.tower import TowerInput, tower_step


def _nominal(params, lw=60.0, tw=0.0):
    return make_input(params, [True, True], lw, tw, 7.0, 0.8)


def _names(violations):
    return [v.constraint for v in violations]


class TestCheckInputs:
    def test_nominal_ok(self, cfg):
        assert check_inputs(cfg.params, cfg.initial_state, _nominal(cfg.params), PlantDisturbance(1000, 25)) == []

    def test_on_chiller_without_condenser_flow(self, cfg):
        u = _nominal(cfg.params)
        chw = replace(u.chw, mdot_cd=(0.0, u.chw.mdot_cd[1]))
        cw = replace(u.cw, mdot_cw=(0.0, u.cw.mdot_cw[1]))
        bad = check_inputs(cfg.params, cfg.initial_state, PlantInput(chw, cw))
        assert "on-chiller zero condenser flow" in _names(bad)

    def test_condenser_mass_balance(self, cfg):
        u = make_input(cfg.params, [True, False], 25.0, 0.0, 7.0)
        cw = replace(u.cw, mdot_cw=(40.0, 0.0))
        bad = check_inputs(cfg.params, cfg.initial_state, PlantInput(u.chw, cw))
        assert "cooling water mass balance" in _names(bad)
        assert "47.44" in str(bad[0]) and "40" in str(bad[0])

    def test_all_violations_reported(self, cfg):
        u = make_input(cfg.params, [True, False], 90.0, 2000.0, 7.0)
        cw = replace(u.cw, mdot_cw=(40.0, 0.0))
        names = set(_names(check_inputs(cfg.params, cfg.initial_state, PlantInput(u.chw, cw))))
        assert {"cooling water mass balance", "chilled water flow balance", "TES fraction bounds"} <= names

    def test_primary_flow_must_be_nominal(self, cfg):
        u = _nominal(cfg.params)
        chw = replace(u.chw, mdot_chws=(20.0, u.chw.mdot_chws[1]))
        assert "primary flow" in _names(check_inputs(cfg.params, cfg.initial_state, PlantInput(chw, u.cw)))

    def test_coil_supply_too_warm(self, cfg):
        x = replace(cfg.initial_state, tes=replace(cfg.initial_state.tes, T_twc=16.0))
        u = make_input(cfg.params, [False, False], 10.0, -10.0, 7.0)
        assert "coil input constraints" in _names(check_inputs(cfg.params, x, u))

    def test_dimension(self, cfg):
        u = _nominal(cfg.params)
        chw = replace(u.chw, on=(True,))
        assert _names(check_inputs(cfg.params, cfg.initial_state, PlantInput(chw, u.cw))) == ["dimension"]

    def test_non_finite(self, cfg):
        u = _nominal(cfg.params, lw=float("nan"))
        assert "finite" in _names(check_inputs(cfg.params, cfg.initial_state, u))

    def test_step_raises(self, cfg):
        u = make_input(cfg.params, [True, False], 40.0, 0.0, 7.0)
        with pytest.raises(FeasibilityError):
            plant_step(cfg.params, cfg.initial_state, u, PlantDisturbance(100.0, 25.0))


def test_state_dimension(cfg):
    x = cfg.initial_state
    assert len(x.as_array()) == 4 + 2 * 2 + 2 == 10
    assert len(x.as_array(full=True)) == 11


def test_synchronous_coupling_and_sums(cfg):
    p, x = cfg.params, cfg.initial_state
    u = _nominal(p, lw=70.0, tw=-10.0)
    w = PlantDisturbance(2000.0, 24.0)
    x1, y = plant_step(p, x, u, w)
    # every running chiller sees the mixed return and the mixed tower supply
    q = P = 0.0
    for i, cp in enumerate(p.chillers):
        r = chiller_step(cp, x.chillers[i],
                         ChillerInput(y.chw.T_chwr_bar, cp.mdot_chw_nom, y.cw.T_cws_bar, cp.mdot_cd_nom, 7.0),
                         p.solver)
        assert r.next_state == x1.chillers[i]
        q += r.qdot_evap
        P += r.P_ch
    assert y.chw.qdot_evap == q and y.chw.P_ch == P
    for j, tp in enumerate(p.towers):
        r = tower_step(tp, x.towers[j], TowerInput(y.cw.T_cwr_bar, u.cw.mdot_cw[j], u.cw.mdot_oa[j]), 24.0, p.solver)
        assert r.next_state == x1.towers[j]
    assert y.P_tot == y.chw.P_ch + y.cw.P_ct + y.chw.P_chwp + y.cw.P_cwp
    assert y.chw.mdot_bp == pytest.approx(p.chillers[0].mdot_chw_nom + p.chillers[1].mdot_chw_nom - 60.0)


def test_step_is_pure(cfg):
    p, x = cfg.params, cfg.initial_state
    u, w = _nominal(p), PlantDisturbance(1500.0, 26.0)
    assert plant_step(p, x, u, w) == plant_step(p, x, u, w)


def test_off_equipment_holds_state(cfg):
    p, x = cfg.params, cfg.initial_state
    u = make_input(p, [True, False], 25.0, 0.0, 7.0)
    x1, y = plant_step(p, x, u, PlantDisturbance(500.0, 25.0))
    assert x1.chillers[1] == x.chillers[1] and x1.towers[1] == x.towers[1]


def test_quiescent_plant(cfg):
    # with every chiller off the coil can only be fed from storage, so the
    # storage flow must equal the coil flow in magnitude
    p, x = cfg.params, cfg.initial_state
    u = make_input(p, [False, False], 1e-3, -1e-3, 7.0)
    x1, y = plant_step(p, x, u, PlantDisturbance(0.0, 25.0))
    assert y.chw.qdot_cc == 0.0 and y.chw.P_ch == 0.0 and y.cw.P_ct == 0.0
    assert y.P_tot == y.chw.P_chwp + y.cw.P_cwp == 0.0
    assert x1.coil.T_lwr < x.coil.T_lwr  # relaxes toward the storage supply temperature


def _run_constant(p, x, u, w, n):
    for _ in range(n):
        x, y = plant_step(p, x, u, w)
    return x, y


def test_nominal_load_met_at_setpoint(cfg):
    p = cfg.params
    x, y = _run_constant(p, cfg.initial_state, _nominal(p, lw=80.0), PlantDisturbance(2000.0, 24.0), 400)
    assert y.chw.qdot_cc == 2000.0
    assert all(abs(c.T_chws - 7.0) < 0.05 for c in x.chillers)


def test_overload_saturates_coil(cfg):
    p = cfg.params
    load = 1.3 * p.chiller_capacity
    x, y = _run_constant(p, cfg.initial_state, _nominal(p, lw=p.coil.mdot_lw_ub), PlantDisturbance(load, 24.0), 400)
    assert y.chw.qdot_cc < load
    assert x.coil.T_lwr == pytest.approx(p.coil.T_lwr_ub, abs=1e-6)
    assert all(c.T_cdwr <= cp.T_cdwr_ub + 1e-6 for c, cp in zip(x.chillers, p.chillers))


class TestPlantwideCop:
    def test_zero_cooling(self):
        assert plantwide_cop(np.zeros(5), np.ones(5)) == 0.0

    def test_constant_ratio(self):
        assert plantwide_cop(np.full(7, 600.0), np.full(7, 100.0)) == 6.0

    def test_no_power(self):
        with pytest.raises(ValueError):
            plantwide_cop(np.ones(3), np.zeros(3))
