"""Variable-speed evaporative cooling tower with range saturation.

The YorkCalc correlation predicts the approach for a given range, wet-bulb
and liquid-to-gas ratio. Instead of trusting it blindly, the range and
approach are chosen as the pair that best agrees with the correlation while
staying inside their design bounds and adding up to the available scope
(return water temperature minus wet-bulb).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .chiller import _pump_law
from .core import C_PW, ParameterError, check_filter, lowpass
from .optim import DEFAULT_SOLVER, Bracket, SolverSettings, minimize_scalar

NO_COOLING, RANGE_SATURATED, CORRELATED = 1, 2, 3


@dataclass(frozen=True)
class TowerParams:
    c: tuple[float, ...]
    mdot_cw_nom: float
    mdot_oa_nom: float
    a_ct: float
    P_ct_nom: float
    lgr_ub: float = 8.0
    T_ran_lb: float = 2.2
    T_ran_ub: float = 22.2
    T_app_lb: float = 0.0
    T_app_ub: float = 40.0
    pump_g: tuple[float, ...] = (0.0, 0.0, 0.0, 0.0)
    name: str = ""

    def __post_init__(self):
        if len(self.c) != 27:
            raise ParameterError(f"approach correlation needs 27 coefficients, got {len(self.c)}")
        if len(self.pump_g) != 4:
            raise ParameterError("pump_g needs 4 coefficients")
        if not (self.mdot_cw_nom > 0 and self.mdot_oa_nom > 0):
            raise ParameterError("nominal flows must be positive")
        if not (self.T_ran_lb <= self.T_ran_ub and self.T_app_lb <= self.T_app_ub):
            raise ParameterError("range/approach bounds are not ordered")
        if not self.lgr_ub > 0:
            raise ParameterError("lgr_ub must be positive")
        if not self.P_ct_nom >= 0:
            raise ParameterError("P_ct_nom must be nonnegative")
        check_filter(self.a_ct)


@dataclass(frozen=True)
class TowerState:
    T_cws: float


@dataclass(frozen=True)
class TowerInput:
    T_cwr: float
    mdot_cw: float
    mdot_oa: float


@dataclass(frozen=True)
class TowerResult:
    next_state: TowerState
    T_ran: float
    T_app: float
    qdot_ct: float
    P_ct: float
    P_cwp: float
    case: int


def coeff_index(i: int, j: int, l: int) -> int:
    """Position of the coefficient multiplying ``Twb**i * Tr**j * LGR**l``."""
    return 9 * i + 3 * j + l


def range_polynomial(c: Sequence[float], T_oawb: float, lgr: float) -> tuple[float, float, float]:
    """Collapse the correlation at fixed wet-bulb and LGR to ``b0 + b1*Tr + b2*Tr**2``."""
    b = [0.0, 0.0, 0.0]
    for i in range(3):
        wi = T_oawb**i
        for j in range(3):
            s = 0.0
            for l in range(3):
                s += c[coeff_index(i, j, l)] * lgr**l
            b[j] += wi * s
    return b[0], b[1], b[2]


def approach_hat(p: TowerParams, T_ran, T_oawb: float, lgr: float):
    """Correlated approach (degC); ``T_ran`` may be a scalar or an array."""
    T_ran = np.asarray(T_ran, dtype=float)
    total = np.zeros_like(T_ran)
    for i in range(3):
        for j in range(3):
            for l in range(3):
                total = total + p.c[coeff_index(i, j, l)] * T_oawb**i * T_ran**j * lgr**l
    return total if total.ndim else float(total)


def liquid_gas_ratio(p: TowerParams, mdot_cw: float, mdot_oa: float) -> float:
    if not mdot_oa > 0:
        raise ParameterError("liquid-to-gas ratio is undefined with zero air flow")
    fr_wat = mdot_cw / p.mdot_cw_nom
    fr_air = mdot_oa / p.mdot_oa_nom
    return min(fr_wat / fr_air, p.lgr_ub)


def cw_pump_power(pump_g: Sequence[float], mdot_cw: float) -> float:
    """Cooling water pump power ``g1 ln(1 + g2 m) + g3 m + g4``, kW."""
    return _pump_law(pump_g, mdot_cw)


def range_bracket(p: TowerParams, T_sco: float) -> Bracket:
    return Bracket(max(p.T_ran_lb, T_sco - p.T_app_ub), min(p.T_ran_ub, T_sco - p.T_app_lb))


def solve_range(p: TowerParams, T_sco: float, T_oawb: float, lgr: float,
                solver: SolverSettings = DEFAULT_SOLVER) -> float:
    """Range that best matches the correlation with approach = scope - range."""
    b0, b1, b2 = range_polynomial(p.c, T_oawb, lgr)

    def mismatch(r):
        return (T_sco - r - (b0 + b1 * r + b2 * r * r)) ** 2

    r, _ = minimize_scalar(mismatch, range_bracket(p, T_sco), solver, vectorized=True)
    return r


def classify(p: TowerParams, T_sco: float, mdot_oa: float) -> int:
    if mdot_oa <= 0 or T_sco < p.T_ran_lb + p.T_app_lb:
        return NO_COOLING
    if T_sco > p.T_ran_ub + p.T_app_ub:
        return RANGE_SATURATED
    return CORRELATED


def tower_step(
    p: TowerParams,
    x: TowerState,
    u: TowerInput,
    T_oawb: float,
    solver: SolverSettings = DEFAULT_SOLVER,
    c_pw: float = C_PW,
) -> TowerResult:
    """Advance one tower by one time step.

    Case 1 (scope too small, or fan stopped) and case 2 (scope beyond the
    largest range plus approach) set the next supply temperature directly;
    case 3 solves for the range and filters toward ``T_cwr - T_ran``.
    """
    T_sco = u.T_cwr - T_oawb
    case = classify(p, T_sco, u.mdot_oa)
    if case == NO_COOLING:
        T_ran = 0.0
        T_next = u.T_cwr
    elif case == RANGE_SATURATED:
        T_ran = p.T_ran_ub
        T_next = u.T_cwr - p.T_ran_ub
    else:
        lgr = liquid_gas_ratio(p, u.mdot_cw, u.mdot_oa)
        T_ran = solve_range(p, T_sco, T_oawb, lgr, solver)
        T_next = lowpass(p.a_ct, x.T_cws, u.T_cwr - T_ran)

    qdot_ct = max(c_pw * u.mdot_cw * (u.T_cwr - x.T_cws), 0.0)
    fr_air = u.mdot_oa / p.mdot_oa_nom
    return TowerResult(
        next_state=TowerState(T_next),
        T_ran=T_ran,
        T_app=T_sco - T_ran,
        qdot_ct=qdot_ct,
        P_ct=p.P_ct_nom * fr_air**3,
        P_cwp=cw_pump_power(p.pump_g, u.mdot_cw),
        case=case,
    )


def tower_objective(p: TowerParams, T_sco: float, T_oawb: float, lgr: float):
    """Vectorized mismatch objective and its bracket, for external checks."""

    def mismatch(r):
        return (T_sco - r - approach_hat(p, r, T_oawb, lgr)) ** 2

    return mismatch, range_bracket(p, T_sco)
