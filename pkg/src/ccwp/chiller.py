"""Water-cooled electric chiller with evaporator and condenser saturation.

The performance model is the usual Electric EIR one (capacity and EIR
biquadratics in leaving chilled water and entering condenser water
temperature, a quadratic part-load EIR curve, and a cycling ratio below the
minimum part-load ratio). What is added is the condenser limit: the
condenser water may heat up to ``T_cdwr_ub`` and no further, so the
evaporator duty the chiller actually delivers is the solution of a small
bounded optimization problem. ``mode="legacy_unsaturated"`` drops the
condenser limit and reproduces the classical behaviour, where a starved
condenser predicts arbitrarily hot return water.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import C_PW, ParameterError, SolverError, check_filter, lowpass
from .optim import DEFAULT_SOLVER, Bracket, SolverSettings, solve_monotone_threshold

SATURATED = "saturated"
LEGACY = "legacy_unsaturated"


@dataclass(frozen=True)
class ChillerParams:
    qdot_evap_nom: float
    P_ch_nom: float
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    gamma_plr: tuple[float, ...]
    a_ch: float
    a_cd: float
    mdot_chw_nom: float
    mdot_cd_nom: float
    plr_lb: float = 0.1
    plr_ub: float = 1.0
    eta1: float = 1.0
    T_chws_lb: float = 5.0
    T_cdwr_ub: float = 40.0
    pump_a: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    mode: Literal["saturated", "legacy_unsaturated"] = SATURATED
    name: str = ""

    def __post_init__(self):
        if not self.qdot_evap_nom > 0:
            raise ParameterError("qdot_evap_nom must be positive")
        if not self.P_ch_nom >= 0:
            raise ParameterError("P_ch_nom must be nonnegative")
        if len(self.alpha) != 6 or len(self.beta) != 6:
            raise ParameterError("alpha and beta need 6 coefficients each")
        if len(self.gamma_plr) != 3:
            raise ParameterError("gamma_plr needs 3 coefficients")
        if len(self.pump_a) != 4:
            raise ParameterError("pump_a needs 4 coefficients")
        if not 0 < self.plr_lb <= self.plr_ub:
            raise ParameterError("need 0 < plr_lb <= plr_ub")
        if not self.eta1 >= 0:
            raise ParameterError("eta1 must be nonnegative")
        if not (self.mdot_chw_nom > 0 and self.mdot_cd_nom > 0):
            raise ParameterError("nominal flows must be positive")
        if self.mode not in (SATURATED, LEGACY):
            raise ParameterError(f"unknown chiller mode {self.mode!r}")
        check_filter(self.a_ch)
        check_filter(self.a_cd)


@dataclass(frozen=True)
class ChillerState:
    T_chws: float
    T_cdwr: float


@dataclass(frozen=True)
class ChillerInput:
    T_chwr: float
    mdot_chw: float
    T_cdws: float
    mdot_cd: float
    T_chws_set: float


@dataclass(frozen=True)
class ChillerResult:
    next_state: ChillerState
    qdot_evap: float
    qdot_cond: float
    P_ch: float
    P_chwp: float
    refrigerant_active: bool
    qdot_evap_req: float = 0.0
    qdot_evap_ub: float = 0.0


def _biquadratic(c: Sequence[float], t1, t2):
    return c[0] + c[1] * t1 + c[2] * t1 * t1 + c[3] * t2 + c[4] * t2 * t2 + c[5] * t1 * t2


def cap_fun_t(alpha: Sequence[float], T_chws: float, T_cdws: float) -> float:
    """Capacity modifier; negative values are clipped to zero."""
    return max(_biquadratic(alpha, T_chws, T_cdws), 0.0)


def eir_fun_t(beta: Sequence[float], T_chws: float, T_cdws: float) -> float:
    """Temperature modifier of the energy input ratio, clipped at zero."""
    return max(_biquadratic(beta, T_chws, T_cdws), 0.0)


def eir_fun_plr(gamma: Sequence[float], plr: float) -> float:
    return gamma[0] + gamma[1] * plr + gamma[2] * plr * plr


def plr_and_cycling(qdot_evap: float, qdot_evap_ub: float, plr_lb: float, plr_ub: float) -> tuple[float, float]:
    """Part-load ratio and cycling ratio.

    The cycling ratio uses the raw ratio ``qdot_evap/qdot_evap_ub`` rather
    than the clamped PLR, so that power goes to zero with the load.
    """
    if not qdot_evap_ub > 0:
        raise ParameterError(f"evaporator capacity must be positive, got {qdot_evap_ub}")
    raw = qdot_evap / qdot_evap_ub
    plr = min(max(raw, plr_lb), plr_ub)
    cr = min(raw / plr_lb, 1.0)
    return plr, cr


def chiller_power(p: ChillerParams, T_chws: float, T_cdws: float, plr: float, cr: float) -> float:
    return max(
        p.P_ch_nom
        * cap_fun_t(p.alpha, T_chws, T_cdws)
        * eir_fun_t(p.beta, T_chws, T_cdws)
        * eir_fun_plr(p.gamma_plr, plr)
        * cr,
        0.0,
    )


def _pump_law(c: Sequence[float], mdot: float) -> float:
    arg = 1.0 + c[1] * mdot
    if arg <= 0:
        raise ParameterError(f"pump curve log argument 1 + a2*mdot = {arg} is not positive")
    return max(c[0] * math.log(arg) + c[2] * mdot + c[3], 0.0)


def chw_pump_power(pump_a: Sequence[float], mdot_chw: float) -> float:
    """Chilled water pump power ``a1 ln(1 + a2 m) + a3 m + a4``, kW."""
    return _pump_law(pump_a, mdot_chw)


def operable(p: ChillerParams, u: ChillerInput) -> bool:
    """Whether the refrigerant loop can run with these inlet conditions.

    A setpoint outside ``[T_chws_lb, T_chwr]`` asks for heating or for
    impossibly cold water; condenser water already hotter than the outlet
    limit can take no heat. Either way the water passes through untouched.
    """
    if not p.T_chws_lb <= u.T_chws_set <= u.T_chwr:
        return False
    if p.mode == SATURATED and not u.T_cdws <= p.T_cdwr_ub:
        return False
    return u.mdot_chw > 0 and u.mdot_cd > 0


class _Duty:
    """Closed-form pieces of the chiller subproblem for one time step."""

    def __init__(self, p: ChillerParams, x: ChillerState, u: ChillerInput, c_pw: float):
        self.p, self.x, self.u = p, x, u
        self.c_pw = c_pw
        self.req = c_pw * u.mdot_chw * (u.T_chwr - u.T_chws_set)
        cap_ft = cap_fun_t(p.alpha, x.T_chws, u.T_cdws)
        self.ub = p.qdot_evap_nom * cap_ft
        # P_ch(q) = k_power * EIRFunPLR(PLR(q)) * CR(q)
        self.k_power = p.P_ch_nom * cap_ft * eir_fun_t(p.beta, x.T_chws, u.T_cdws)

    def power(self, q: float) -> float:
        if self.ub <= 0:
            return 0.0
        plr, cr = plr_and_cycling(q, self.ub, self.p.plr_lb, self.p.plr_ub)
        return max(self.k_power * eir_fun_plr(self.p.gamma_plr, plr) * cr, 0.0)

    def T_chws_next(self, q):
        return lowpass(self.p.a_ch, self.x.T_chws, self.u.T_chwr - q / (self.c_pw * self.u.mdot_chw))

    def T_cdwr_next(self, q: float) -> float:
        qcond = q + self.p.eta1 * self.power(q)
        return lowpass(self.p.a_cd, self.x.T_cdwr, self.u.T_cdws + qcond / (self.c_pw * self.u.mdot_cd))

    def objective(self, q):
        return (self.u.T_chws_set - self.T_chws_next(q)) ** 2

    def tracking_duty(self) -> float:
        """Unconstrained minimizer: the duty that lands exactly on the setpoint."""
        a = self.p.a_ch
        target = (self.u.T_chws_set - a * self.x.T_chws) / (1.0 - a)
        return self.c_pw * self.u.mdot_chw * (self.u.T_chwr - target)


def _condenser_limited_duty(duty: _Duty, q_hi: float, q_track: float, settings: SolverSettings) -> float:
    """Best duty in [0, q_hi] whose condenser outlet stays within its limit.

    The objective is a parabola in q with vertex ``q_track``, so the optimum
    is the feasible point closest to ``q_track``.
    """
    p = duty.p
    g = duty.T_cdwr_next
    limit = p.T_cdwr_ub
    tol = max(settings.refine_tol * 1e-3, 1e-12) * p.qdot_evap_nom
    q_want = min(max(q_track, 0.0), q_hi)
    if g(q_want) <= limit:
        return q_want

    probe = np.linspace(0.0, q_hi, 33)
    vals = [g(q) for q in probe]
    if not all(math.isfinite(v) for v in vals):
        raise SolverError("condenser outlet temperature is not finite", x=float(probe[0]))
    if all(b >= a for a, b in zip(vals, vals[1:])):
        cap = solve_monotone_threshold(g, limit, Bracket(0.0, q_want), tol)
        return cap if g(cap) <= limit else 0.0

    # Non-monotone condenser map: the feasible set may be several intervals.
    qs = np.linspace(0.0, q_hi, settings.grid_points * 8)
    feas = np.array([g(q) <= limit for q in qs])
    if not feas.any():
        return 0.0
    idx = np.flatnonzero(feas)
    i = int(idx[np.argmin(np.abs(qs[idx] - q_want))])
    lo, hi = float(qs[i]), q_want
    # bisect the feasibility edge between the feasible grid point and q_want
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) <= limit:
            lo = mid
        else:
            hi = mid
    return lo


def chiller_step(
    p: ChillerParams,
    x: ChillerState,
    u: ChillerInput,
    solver: SolverSettings = DEFAULT_SOLVER,
    c_pw: float = C_PW,
) -> ChillerResult:
    """Advance one chiller by one time step.

    The evaporator duty minimizes the squared distance of the next chilled
    water supply temperature from its setpoint, subject to
    ``0 <= q <= min(required duty, evaporator capacity)`` and, in saturated
    mode, to the next condenser outlet temperature not exceeding
    ``T_cdwr_ub``. The objective decreases in ``q`` up to the duty that hits
    the setpoint exactly, so the optimum is that duty clipped to the
    feasible set; the condenser edge is found by bisection.
    """
    pump = chw_pump_power(p.pump_a, u.mdot_chw) if u.mdot_chw > 0 else 0.0
    if not operable(p, u):
        return ChillerResult(ChillerState(u.T_chwr, u.T_cdws), 0.0, 0.0, 0.0, pump, False)

    duty = _Duty(p, x, u, c_pw)
    q_hi = max(min(duty.req, duty.ub), 0.0)
    q_track = duty.tracking_duty()
    if q_hi <= 0.0:
        q = 0.0
    elif p.mode == SATURATED:
        q = _condenser_limited_duty(duty, q_hi, q_track, solver)
    else:
        q = min(max(q_track, 0.0), q_hi)

    P_ch = duty.power(q)
    qdot_cond = q + p.eta1 * P_ch
    T_cdwr = lowpass(p.a_cd, x.T_cdwr, u.T_cdws + qdot_cond / (c_pw * u.mdot_cd))
    return ChillerResult(
        ChillerState(duty.T_chws_next(q), T_cdwr),
        q,
        qdot_cond,
        P_ch,
        pump,
        True,
        qdot_evap_req=duty.req,
        qdot_evap_ub=duty.ub,
    )


def chiller_objective(p: ChillerParams, x: ChillerState, u: ChillerInput, c_pw: float = C_PW):
    """Objective, feasible upper duty and condenser map for external checks.

    Returns ``(objective, q_hi, T_cdwr_next)``; used by tests and the
    verification tooling to cross-check ``chiller_step`` by brute force.
    """
    duty = _Duty(p, x, u, c_pw)
    return duty.objective, max(min(duty.req, duty.ub), 0.0), duty.T_cdwr_next
