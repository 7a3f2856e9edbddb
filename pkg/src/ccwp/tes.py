"""Chilled water thermal energy storage as two virtual sub-tanks.

A thermocline separates a cold sub-tank (``twc``) from a warm one (``tww``).
Total mass is constant; the signed flow ``mdot_tw`` moves water between them:

* ``mdot_tw > 0`` charges: plant supply water enters the cold tank and warm
  water leaves.
* ``mdot_tw < 0`` discharges: cold water leaves and coil return water enters
  the warm tank.

The tank is perfectly insulated and the sub-tanks do not mix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .core import FeasibilityError, ParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TesParams:
    M_tes: float = 1.413e5
    S_lb: float = 0.05
    S_ub: float = 0.95

    def __post_init__(self):
        if not self.M_tes > 0:
            raise ParameterError("M_tes must be positive")
        if not 0.0 <= self.S_lb < self.S_ub <= 1.0:
            raise ParameterError(
                f"fraction bounds must satisfy 0 <= S_lb < S_ub <= 1, got {self.S_lb}, {self.S_ub}"
            )


@dataclass(frozen=True)
class TesState:
    T_twc: float
    S_twc: float
    T_tww: float
    S_tww: float


@dataclass(frozen=True)
class TesInput:
    T_sw: float
    T_lwr: float
    mdot_tw: float


def tes_violations(p: TesParams, x: TesState, mdot_tw: float, t_s: float) -> list[str]:
    """Fraction bounds the state would violate after one step with ``mdot_tw``."""
    dm = mdot_tw * t_s
    out = []
    S_twc = x.S_twc + dm / p.M_tes
    S_tww = x.S_tww - dm / p.M_tes
    tol = 1e-12
    for name, s in (("cold", S_twc), ("warm", S_tww)):
        if not p.S_lb - tol <= s <= p.S_ub + tol:
            out.append(
                f"TES {name} sub-tank fraction would become {s:.6g}, "
                f"outside [{p.S_lb}, {p.S_ub}] (mdot_tw={mdot_tw:.4g})"
            )
    if p.M_tes * x.S_tww - dm <= 0 or p.M_tes * x.S_twc + dm <= 0:
        out.append(f"TES flow mdot_tw={mdot_tw:.4g} over-drains a sub-tank")
    return out


def tes_discharge_temp(x: TesState, mdot_tw: float) -> float:
    """Temperature of the water leaving the tank.

    Cold water leaves while discharging, warm water while charging. With no
    flow the value is unused and the cold-tank temperature is returned.
    """
    return x.T_tww if mdot_tw > 0 else x.T_twc


def tes_step(p: TesParams, x: TesState, u: TesInput, t_s: float) -> TesState:
    violations = tes_violations(p, x, u.mdot_tw, t_s)
    if violations:
        raise FeasibilityError(violations)
    m = u.mdot_tw
    dS = m * t_s / p.M_tes
    S_twc = x.S_twc + dS
    S_tww = x.S_tww - dS
    T_tww, T_twc = x.T_tww, x.T_twc
    if m < 0:
        T_tww = x.T_tww + t_s * m / (p.M_tes * x.S_tww - t_s * m) * (x.T_tww - u.T_lwr)
    elif m > 0:
        T_twc = x.T_twc + t_s * m / (p.M_tes * x.S_twc + t_s * m) * (u.T_sw - x.T_twc)
    if T_twc > T_tww:
        logger.warning("TES cold sub-tank (%.3f C) is warmer than warm sub-tank (%.3f C)", T_twc, T_tww)
    return TesState(T_twc, S_twc, T_tww, S_tww)
