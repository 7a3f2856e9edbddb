"""Whole-plant composition and one-step state propagation.

All couplings between equipment use time-k values: the chiller entering
water temperature comes from the current coil, storage and chiller states,
the condenser entering water from the current tower states, and so on. One
step is therefore a pure function of ``(state, input, disturbance)`` with no
inner iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .chiller import ChillerInput, ChillerParams, ChillerState, chiller_step
from .coil import CoilInput, CoilParams, CoilState, coil_step, coil_violations
from .core import FeasibilityError, ParameterError, SimConstants
from .loops import (
    ChwLoopInput,
    ChwLoopOutputs,
    CwLoopInput,
    CwLoopOutputs,
    chw_flow_balance,
    cw_mass_violations,
    flow_violations,
    mix_T_chwr,
    mix_T_lws,
    mix_T_rw,
    weighted_avg_temp,
)
from .optim import DEFAULT_SOLVER, SolverSettings
from .tes import TesInput, TesParams, TesState, tes_step, tes_violations
from .tower import TowerInput, TowerParams, TowerState, tower_step


@dataclass(frozen=True)
class PlantParams:
    coil: CoilParams
    tes: TesParams
    chillers: tuple[ChillerParams, ...]
    towers: tuple[TowerParams, ...]
    constants: SimConstants = field(default_factory=SimConstants)
    solver: SolverSettings = DEFAULT_SOLVER
    T_cwr_nom: float = 35.0

    def __post_init__(self):
        if not self.chillers:
            raise ParameterError("plant needs at least one chiller")
        if not self.towers:
            raise ParameterError("plant needs at least one tower")

    @property
    def n_ch(self) -> int:
        return len(self.chillers)

    @property
    def n_ct(self) -> int:
        return len(self.towers)

    @property
    def chiller_capacity(self) -> float:
        """Combined nominal evaporator capacity, kW."""
        return sum(c.qdot_evap_nom for c in self.chillers)


@dataclass(frozen=True)
class PlantState:
    coil: CoilState
    tes: TesState
    chillers: tuple[ChillerState, ...]
    towers: tuple[TowerState, ...]

    def as_array(self, full: bool = False) -> np.ndarray:
        """State as a flat vector.

        By default the warm-tank fraction is omitted because it always equals
        ``1 - S_twc``; that leaves ``4 + 2*n_ch + n_ct`` independent entries.
        ``full=True`` includes it.
        """
        values = [self.coil.T_lwr, self.tes.T_twc, self.tes.S_twc, self.tes.T_tww]
        if full:
            values.append(self.tes.S_tww)
        for c in self.chillers:
            values += [c.T_chws, c.T_cdwr]
        values += [t.T_cws for t in self.towers]
        return np.array(values, dtype=float)


@dataclass(frozen=True)
class PlantInput:
    chw: ChwLoopInput
    cw: CwLoopInput


@dataclass(frozen=True)
class PlantDisturbance:
    qdot_L: float
    T_oawb: float


@dataclass(frozen=True)
class PlantOutput:
    chw: ChwLoopOutputs
    cw: CwLoopOutputs
    P_tot: float


@dataclass(frozen=True)
class Violation:
    constraint: str
    message: str

    def __str__(self):
        return f"[{self.constraint}] {self.message}"


@dataclass(frozen=True)
class LoopTemperatures:
    """Time-k mixing temperatures shared by the input check and the step."""

    any_on: bool
    T_sw: float
    T_rw: float
    T_chwr_bar: float
    T_chws_bar: float
    T_lws: float
    T_cwr_bar: float
    T_cws_bar: float


def loop_temperatures_from_balance(params: PlantParams, x: PlantState, u: PlantInput, mdot_sw, mdot_bp, mdot_chw) -> LoopTemperatures:
    chw, cw = u.chw, u.cw
    any_on = any(chw.on)
    nom = [c.mdot_chw_nom for c in params.chillers]
    T_rw = mix_T_rw(x.coil.T_lwr, x.tes.T_tww, chw.mdot_tw, mdot_sw, any_on)
    if any_on:
        T_chws_bar = weighted_avg_temp([c.T_chws for c in x.chillers], nom, chw.on, fallback=T_rw)
        T_chwr_bar = mix_T_chwr(T_rw, T_chws_bar, mdot_bp, mdot_chw, True)
        T_sw = T_chws_bar
    else:
        T_chwr_bar = T_rw
        T_chws_bar = T_chwr_bar
        T_sw = x.tes.T_twc
    T_lws = mix_T_lws(T_sw, x.tes.T_twc, chw.mdot_tw, chw.mdot_lw, any_on)

    T_cwr_bar = weighted_avg_temp([c.T_cdwr for c in x.chillers], chw.mdot_cd, chw.on, fallback=params.T_cwr_nom)
    T_cws_bar = weighted_avg_temp([t.T_cws for t in x.towers], cw.mdot_cw, cw.on, fallback=T_cwr_bar)
    return LoopTemperatures(any_on, T_sw, T_rw, T_chwr_bar, T_chws_bar, T_lws, T_cwr_bar, T_cws_bar)


def loop_temperatures(params: PlantParams, x: PlantState, u: PlantInput) -> LoopTemperatures:
    """Time-k mixing temperatures for command ``u``, without feasibility checks."""
    nom = [c.mdot_chw_nom for c in params.chillers]
    mdot_chw = sum(m for m, on in zip(nom, u.chw.on) if on)
    mdot_sw = max(u.chw.mdot_lw + u.chw.mdot_tw, 0.0)
    return loop_temperatures_from_balance(params, x, u, mdot_sw, max(mdot_chw - mdot_sw, 0.0), mdot_chw)


def _finite(name: str, value: float, out: list[Violation]):
    if not math.isfinite(value):
        out.append(Violation("finite", f"{name}={value!r} is not finite"))
        return False
    return True


def check_inputs(params: PlantParams, x: PlantState, u: PlantInput,
                 w: PlantDisturbance | None = None) -> list[Violation]:
    """All feasibility violations of ``u`` at state ``x``; empty means feasible."""
    out: list[Violation] = []
    chw, cw = u.chw, u.cw
    n_ch, n_ct = params.n_ch, params.n_ct
    if not (len(chw.on) == len(chw.mdot_cd) == len(chw.mdot_chws) == n_ch):
        out.append(Violation("dimension", f"chilled water loop input must have {n_ch} entries per chiller"))
    if not (len(cw.on) == len(cw.mdot_cw) == len(cw.mdot_oa) == n_ct):
        out.append(Violation("dimension", f"cooling water loop input must have {n_ct} entries per tower"))
    if out:
        return out

    ok = all(
        [_finite("mdot_lw", chw.mdot_lw, out), _finite("mdot_tw", chw.mdot_tw, out),
         _finite("T_chws_set", chw.T_chws_set, out)]
        + [_finite(f"mdot_cd_{i + 1}", m, out) for i, m in enumerate(chw.mdot_cd)]
        + [_finite(f"mdot_chws_{i + 1}", m, out) for i, m in enumerate(chw.mdot_chws)]
        + [_finite(f"mdot_cw_{j + 1}", m, out) for j, m in enumerate(cw.mdot_cw)]
        + [_finite(f"mdot_oa_{j + 1}", m, out) for j, m in enumerate(cw.mdot_oa)]
    )
    if w is not None:
        ok &= _finite("qdot_L", w.qdot_L, out) & _finite("T_oawb", w.T_oawb, out)
    if not ok:
        return out

    for i, (p, on) in enumerate(zip(params.chillers, chw.on)):
        m_cd, m_chws = chw.mdot_cd[i], chw.mdot_chws[i]
        if on and not m_cd > 0:
            out.append(Violation("on-chiller zero condenser flow",
                                 f"chiller {i + 1} is on with condenser flow {m_cd:.6g}"))
        if m_cd < 0:
            out.append(Violation("nonnegative flow", f"chiller {i + 1} condenser flow {m_cd:.6g} < 0"))
        expected = p.mdot_chw_nom if on else 0.0
        if abs(m_chws - expected) > 1e-9 * max(1.0, expected):
            out.append(Violation("primary flow",
                                 f"chiller {i + 1} chilled water flow {m_chws:.6g} must be "
                                 f"{expected:.6g} when {'on' if on else 'off'}"))
    for j, on in enumerate(cw.on):
        if on and not (cw.mdot_cw[j] >= 0 and cw.mdot_oa[j] >= 0):
            out.append(Violation("nonnegative flow",
                                 f"tower {j + 1} flows must be nonnegative "
                                 f"(mdot_cw={cw.mdot_cw[j]:.6g}, mdot_oa={cw.mdot_oa[j]:.6g})"))

    m_cd = sum(m for m, on in zip(chw.mdot_cd, chw.on) if on)
    m_cw = sum(m for m, on in zip(cw.mdot_cw, cw.on) if on)
    out += [Violation("cooling water mass balance", v) for v in cw_mass_violations(m_cd, m_cw)]

    nom = [c.mdot_chw_nom for c in params.chillers]
    flow = flow_violations(chw.mdot_lw, chw.mdot_tw, chw.on, nom)
    out += [Violation("chilled water flow balance", v) for v in flow]
    out += [Violation("TES fraction bounds", v)
            for v in tes_violations(params.tes, x.tes, chw.mdot_tw, params.constants.t_s)]

    if not flow and chw.mdot_lw > 0:
        mdot_chw = sum(nom[i] for i, on in enumerate(chw.on) if on)
        mdot_sw = chw.mdot_lw + chw.mdot_tw
        loop = loop_temperatures_from_balance(params, x, u, mdot_sw, mdot_chw - mdot_sw, mdot_chw)
        T_lws = loop.T_lws
    else:
        T_lws = params.coil.T_lwr_ub
    qdot_L = w.qdot_L if w is not None else 0.0
    out += [Violation("coil input constraints", v)
            for v in coil_violations(params.coil, CoilInput(T_lws, chw.mdot_lw), qdot_L)]
    return out


def plant_step(params: PlantParams, x: PlantState, u: PlantInput,
               w: PlantDisturbance) -> tuple[PlantState, PlantOutput]:
    """Propagate the whole plant by one sampling period.

    Raises
    ------
    FeasibilityError
        If ``u`` fails :func:`check_inputs`.
    """
    violations = check_inputs(params, x, u, w)
    if violations:
        raise FeasibilityError([str(v) for v in violations])

    c_pw, t_s = params.constants.c_pw, params.constants.t_s
    chw, cw = u.chw, u.cw
    nom = [c.mdot_chw_nom for c in params.chillers]
    fb = chw_flow_balance(chw.mdot_lw, chw.mdot_tw, chw.on, nom)
    loop = loop_temperatures_from_balance(params, x, u, fb.mdot_sw, fb.mdot_bp, fb.mdot_chw)

    coil = coil_step(params.coil, x.coil, CoilInput(loop.T_lws, chw.mdot_lw), w.qdot_L, c_pw)
    tes = tes_step(params.tes, x.tes, TesInput(loop.T_sw, x.coil.T_lwr, chw.mdot_tw), t_s)

    chillers = []
    q_evap = q_cond = P_ch = P_chwp = 0.0
    for i, (p, xi) in enumerate(zip(params.chillers, x.chillers)):
        if not chw.on[i]:
            chillers.append(xi)
            continue
        r = chiller_step(
            p, xi,
            ChillerInput(loop.T_chwr_bar, p.mdot_chw_nom, loop.T_cws_bar, chw.mdot_cd[i], chw.T_chws_set),
            params.solver, c_pw,
        )
        chillers.append(r.next_state)
        q_evap += r.qdot_evap
        q_cond += r.qdot_cond
        P_ch += r.P_ch
        P_chwp += r.P_chwp

    towers = []
    q_ct = P_ct = P_cwp = 0.0
    for j, (p, xj) in enumerate(zip(params.towers, x.towers)):
        if not cw.on[j]:
            towers.append(xj)
            continue
        r = tower_step(p, xj, TowerInput(loop.T_cwr_bar, cw.mdot_cw[j], cw.mdot_oa[j]),
                       w.T_oawb, params.solver, c_pw)
        towers.append(r.next_state)
        q_ct += r.qdot_ct
        P_ct += r.P_ct
        P_cwp += r.P_cwp

    mdot_cd = sum(m for m, on in zip(chw.mdot_cd, chw.on) if on)
    y_chw = ChwLoopOutputs(
        T_sw=loop.T_sw,
        T_rw=loop.T_rw,
        T_chwr_bar=loop.T_chwr_bar,
        T_chws_bar=loop.T_chws_bar,
        mdot_sw=fb.mdot_sw,
        mdot_bp=fb.mdot_bp,
        mdot_chw=fb.mdot_chw,
        mdot_cd=mdot_cd,
        qdot_cc=coil.qdot_cc,
        qdot_evap=q_evap,
        qdot_cond=q_cond,
        P_ch=P_ch,
        P_chwp=P_chwp,
        T_lws=loop.T_lws,
    )
    y_cw = CwLoopOutputs(
        mdot_cw=sum(m for m, on in zip(cw.mdot_cw, cw.on) if on),
        T_cws_bar=loop.T_cws_bar,
        T_cwr_bar=loop.T_cwr_bar,
        qdot_ct=q_ct,
        P_ct=P_ct,
        P_cwp=P_cwp,
    )
    x_next = PlantState(coil.next_state, tes, tuple(chillers), tuple(towers))
    return x_next, PlantOutput(y_chw, y_cw, P_ch + P_ct + P_chwp + P_cwp)


def plantwide_cop(qdot_cc, P_tot) -> float:
    """Total delivered cooling over total electric energy for a run.

    Zero delivered cooling gives 0; positive cooling with no power raises.
    """
    q = float(np.sum(qdot_cc))
    p = float(np.sum(P_tot))
    if q == 0.0:
        return 0.0
    if not p > 0:
        raise ValueError("plantwide COP is undefined: total power is zero")
    return q / p
