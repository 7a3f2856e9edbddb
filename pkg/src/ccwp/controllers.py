"""Supervisory controllers that produce one plant command per step.

A controller is any object with ``step(obs) -> PlantInput``. Three are
provided: a price-aware rule-based controller, a constant command, and a
replay of a precomputed input trace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .coil import CoilInput, coil_capacity
from .core import FeasibilityError
from .io import RuleBasedConfig, read_trace
from .loops import ChwLoopInput, CwLoopInput
from .plant import (
    PlantInput,
    PlantOutput,
    PlantParams,
    PlantState,
    check_inputs,
    loop_temperatures,
)


@dataclass(frozen=True)
class Observation:
    """What a controller sees at step ``k`` before choosing ``u_k``.

    ``price_history`` holds the prices of steps ``0..k`` inclusive.
    """

    k: int
    time_s: float
    state: PlantState
    last_output: PlantOutput | None
    qdot_L: float
    T_oawb: float
    price: float
    price_history: np.ndarray


class Controller(Protocol):
    def step(self, obs: Observation) -> PlantInput: ...


def make_input(params: PlantParams, on: Sequence[bool], mdot_lw: float, mdot_tw: float,
               T_chws_set: float, air_fraction: float = 1.0) -> PlantInput:
    """Command with nominal primary and condenser flows on the running chillers.

    Towers are paired with chillers one-to-one when the counts match;
    otherwise the total condenser flow is split over all towers in
    proportion to their nominal water flow.
    """
    on = tuple(bool(b) for b in on)
    chw_nom = tuple(c.mdot_chw_nom if b else 0.0 for c, b in zip(params.chillers, on))
    cd = tuple(c.mdot_cd_nom if b else 0.0 for c, b in zip(params.chillers, on))
    if params.n_ct == params.n_ch:
        ct_on = on
        cw = cd
    else:
        total = sum(cd)
        ct_on = (total > 0,) * params.n_ct
        nom_total = sum(t.mdot_cw_nom for t in params.towers)
        cw = tuple(total * t.mdot_cw_nom / nom_total for t in params.towers)
    oa = tuple(air_fraction * t.mdot_oa_nom if b else 0.0 for t, b in zip(params.towers, ct_on))
    return PlantInput(
        ChwLoopInput(mdot_lw, mdot_tw, T_chws_set, chw_nom, on, cd),
        CwLoopInput(ct_on, cw, oa),
    )


class ConstantController:
    """Apply the same command every step."""

    def __init__(self, u: PlantInput):
        self.u = u

    def step(self, obs: Observation) -> PlantInput:
        return self.u

    @classmethod
    def all_off(cls, params: PlantParams, mdot_lw: float = 1.0) -> "ConstantController":
        """Every chiller and tower off; the coil is fed from storage alone."""
        return cls(make_input(params, [False] * params.n_ch, mdot_lw, -mdot_lw, 7.0))

    @classmethod
    def all_on(cls, params: PlantParams, mdot_lw: float, T_chws_set: float = 7.0,
               air_fraction: float = 1.0) -> "ConstantController":
        return cls(make_input(params, [True] * params.n_ch, mdot_lw, 0.0, T_chws_set, air_fraction))


class ReplayController:
    """Replay the input columns of a trace file, one row per step."""

    def __init__(self, params: PlantParams, path: str | Path):
        columns, data = read_trace(path)
        self.params = params
        idx = {c: i for i, c in enumerate(columns)}
        need = ["mdot_lw", "mdot_tw", "T_chws_set"]
        need += [f"{p}_{i}" for i in range(1, params.n_ch + 1) for p in ("on_ch", "mdot_chws", "mdot_cd")]
        need += [f"{p}_{j}" for j in range(1, params.n_ct + 1) for p in ("on_ct", "mdot_cw", "mdot_oa")]
        missing = [c for c in need if c not in idx]
        if missing:
            raise ValueError(f"{path}: input trace lacks columns {missing}")
        self._rows = data
        self._idx = idx

    def __len__(self):
        return len(self._rows)

    def step(self, obs: Observation) -> PlantInput:
        if obs.k >= len(self._rows):
            raise IndexError(f"input trace has {len(self._rows)} rows; step {obs.k} requested")
        r, ix = self._rows[obs.k], self._idx

        def col(prefix, n):
            return tuple(float(r[ix[f"{prefix}_{i}"]]) for i in range(1, n + 1))

        n_ch, n_ct = self.params.n_ch, self.params.n_ct
        return PlantInput(
            ChwLoopInput(
                float(r[ix["mdot_lw"]]),
                float(r[ix["mdot_tw"]]),
                float(r[ix["T_chws_set"]]),
                col("mdot_chws", n_ch),
                tuple(v != 0 for v in col("on_ch", n_ch)),
                col("mdot_cd", n_ch),
            ),
            CwLoopInput(tuple(v != 0 for v in col("on_ct", n_ct)), col("mdot_cw", n_ct), col("mdot_oa", n_ct)),
        )


class RuleBasedController:
    """Price-aware staging and storage rules.

    Each step:

    * the price is "cheap" when it does not exceed the configured quantile
      of the prices seen over the trailing window;
    * storage charges when cheap, when the staged chillers have room for the
      extra duty, and when the cold fraction can grow; it discharges when
      the price is high (or the load exceeds total chiller capacity) and the
      cold fraction stays above ``S_lb + tes_margin``;
    * the smallest chiller set whose nominal capacity covers
      ``staging_margin`` times the net load, and whose primary flow covers
      the secondary flow, is switched on; towers follow their chillers with
      a fixed fraction of nominal air flow;
    * the coil flow is sized so the coil return would reach
      ``T_lwr_target`` at the current supply temperature; when even that
      cannot cover the load the flow goes to its upper bound.

    The command is clamped to the storage, flow and coil limits before it
    is returned, so it always passes :func:`ccwp.plant.check_inputs`.
    """

    def __init__(self, params: PlantParams, cfg: RuleBasedConfig | None = None):
        self.params = params
        self.cfg = cfg or RuleBasedConfig()
        bad = self.cfg.violations()
        if bad:
            raise ValueError("; ".join(bad))
        n = params.n_ch
        # candidate chiller sets, smallest total capacity first
        sets = [c for r in range(n + 1) for c in combinations(range(n), r)]
        caps = [sum(params.chillers[i].qdot_evap_nom for i in s) for s in sets]
        order = sorted(range(len(sets)), key=lambda i: (caps[i], len(sets[i]), sets[i]))
        self._sets = [tuple(i in sets[j] for i in range(n)) for j in order]
        self._caps = [caps[j] for j in order]

    # -- helpers ---------------------------------------------------------

    def _cheap(self, obs: Observation) -> bool:
        t_s = self.params.constants.t_s
        w = max(1, int(round(self.cfg.price_window_h * 3600.0 / t_s)))
        hist = obs.price_history[-w:]
        return bool(obs.price <= np.quantile(hist, self.cfg.price_quantile))

    def _tw_limits(self, x: PlantState) -> tuple[float, float]:
        tes = self.params.tes
        k = tes.M_tes / self.params.constants.t_s
        shrink = 1.0 - 1e-9
        hi = min(tes.S_ub - x.tes.S_twc, x.tes.S_tww - tes.S_lb) * k * shrink
        lo = -min(x.tes.S_twc - tes.S_lb, tes.S_ub - x.tes.S_tww) * k * shrink
        return min(lo, 0.0), max(hi, 0.0)

    def _coil_flow(self, x: PlantState, on, mdot_tw: float, q_L: float) -> float:
        """Coil flow that meets ``q_L`` with the return at ``T_lwr_target``."""
        p, cfg = self.params, self.cfg
        c = p.constants.c_pw
        ub = p.coil.mdot_lw_ub
        m_lo = max(cfg.mdot_lw_min, -min(mdot_tw, 0.0))
        probe = make_input(p, on, max(m_lo, 1.0), mdot_tw, cfg.T_chws_set)
        T_sw = loop_temperatures(p, x, probe).T_sw
        dT = cfg.T_lwr_target - T_sw
        if dT <= 0.5:
            return ub
        # c*m*(target - T_lws) = q with T_lws the flow-weighted blend of
        # supply water and storage discharge
        relief = -min(mdot_tw, 0.0) * (T_sw - x.tes.T_twc)
        m = (q_L / c - relief) / dT
        return min(max(m, m_lo), ub)

    def _command(self, x: PlantState, on, mdot_lw: float, mdot_tw: float, air: float) -> PlantInput:
        return make_input(self.params, on, mdot_lw, mdot_tw, self.cfg.T_chws_set, air)

    def _sized(self, x: PlantState, on, mdot_tw: float, q_L: float) -> PlantInput:
        """Size the coil flow, then go to full flow if capacity falls short."""
        p = self.params
        lw = self._coil_flow(x, on, mdot_tw, q_L)
        u = self._command(x, on, lw, mdot_tw, self.cfg.tower_air_fraction)
        T_lws = loop_temperatures(p, x, u).T_lws
        cap = coil_capacity(p.coil, CoilInput(T_lws, lw), p.constants.c_pw)
        if cap < q_L and lw < p.coil.mdot_lw_ub:
            u = self._command(x, on, p.coil.mdot_lw_ub, mdot_tw, self.cfg.tower_air_fraction)
        return u

    def _fits(self, u: PlantInput) -> bool:
        chw = u.chw
        supply = sum(chw.mdot_chws)
        sw = chw.mdot_lw + chw.mdot_tw
        if any(chw.on):
            return sw <= supply and sw >= 0
        return abs(sw) <= 1e-12

    # -- main ------------------------------------------------------------

    def step(self, obs: Observation) -> PlantInput:
        p, cfg, x = self.params, self.cfg, obs.state
        c = p.constants.c_pw
        q_L = obs.qdot_L
        total_cap = p.chiller_capacity
        tw_lo, tw_hi = self._tw_limits(x)
        cheap = self._cheap(obs)

        tw_dis = -min(cfg.tes_discharge_flow, -tw_lo)
        tw_ch = min(cfg.tes_charge_flow, tw_hi)
        S_after = x.tes.S_twc + tw_dis * p.constants.t_s / p.tes.M_tes
        can_discharge = tw_dis < 0 and S_after >= p.tes.S_lb + cfg.tes_margin
        discharge = (not cheap or q_L > total_cap) and can_discharge and x.tes.T_twc < cfg.T_lwr_target
        charge = cheap and not discharge and tw_ch > 0

        # all chillers off: the coil draws only from storage
        if discharge:
            dT = cfg.T_lwr_target - x.tes.T_twc
            m_need = q_L / (c * dT) if dT > 0.5 else math.inf
            m_off = max(m_need, cfg.mdot_lw_min)
            if m_off <= -tw_dis and m_off <= p.coil.mdot_lw_ub:
                u = self._command(x, self._sets[0], m_off, -m_off, cfg.tower_air_fraction)
                if not check_inputs(p, x, u) and self._meets(x, u, q_L):
                    return u

        tw = tw_dis if discharge else 0.0
        relief = -tw * max(cfg.T_lwr_target - x.tes.T_twc, 0.0) * c if discharge else 0.0
        charge_duty = tw_ch * max(x.tes.T_tww - cfg.T_chws_set, 0.0) * c

        for on, cap in zip(self._sets, self._caps):
            if not any(on):
                continue
            net = max(q_L - relief, 0.0)
            if cap < cfg.staging_margin * net and cap < total_cap:
                continue
            tw_here = tw
            if charge and cap >= cfg.staging_margin * (net + charge_duty):
                tw_here = tw_ch
            u = self._sized(x, on, tw_here, q_L)
            if not self._fits(u) and tw_here > 0:
                u = self._sized(x, on, 0.0, q_L)
            if not self._fits(u):
                # trim coil flow to what the running chillers can supply
                supply = sum(u.chw.mdot_chws)
                if cap < total_cap:
                    continue
                lw = min(u.chw.mdot_lw, supply - u.chw.mdot_tw)
                u = self._command(x, on, lw, u.chw.mdot_tw, cfg.tower_air_fraction)
            if not check_inputs(p, x, u):
                return u

        # last resort: everything on, no storage flow, full coil flow
        u = self._command(x, self._sets[-1], min(p.coil.mdot_lw_ub, sum(c.mdot_chw_nom for c in p.chillers)),
                          0.0, cfg.tower_air_fraction)
        bad = check_inputs(p, x, u)
        if bad:
            raise FeasibilityError([str(v) for v in bad], step=obs.k)
        return u

    def _meets(self, x: PlantState, u: PlantInput, q_L: float) -> bool:
        p = self.params
        T_lws = loop_temperatures(p, x, u).T_lws
        return coil_capacity(p.coil, CoilInput(T_lws, u.chw.mdot_lw), p.constants.c_pw) >= q_L
