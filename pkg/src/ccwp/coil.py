"""Aggregate cooling coil.

All air handling unit coils are lumped into one water-side heat exchanger.
Its capacity is set implicitly by the highest outlet water temperature the
coils may return, so delivered cooling is ``min(load, capacity)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import C_PW, MDOT_MIN, FeasibilityError, ParameterError, check_filter, lowpass


@dataclass(frozen=True)
class CoilParams:
    a_cc: float
    mdot_lw_ub: float
    T_lwr_ub: float = 15.0

    def __post_init__(self):
        check_filter(self.a_cc)
        if not math.isfinite(self.T_lwr_ub):
            raise ParameterError("T_lwr_ub must be finite")
        if not self.mdot_lw_ub > 0:
            raise ParameterError("mdot_lw_ub must be positive")


@dataclass(frozen=True)
class CoilState:
    T_lwr: float


@dataclass(frozen=True)
class CoilInput:
    T_lws: float
    mdot_lw: float


@dataclass(frozen=True)
class CoilResult:
    next_state: CoilState
    qdot_cc: float
    capacity: float


def coil_violations(p: CoilParams, u: CoilInput, qdot_L: float) -> list[str]:
    """Input constraints that keep the coil from heating the water and
    from dividing by a zero flow."""
    out = []
    if not u.T_lws <= p.T_lwr_ub:
        out.append(f"coil supply temperature T_lws={u.T_lws:.4g} exceeds T_lwr_ub={p.T_lwr_ub:.4g}")
    if not qdot_L >= 0:
        out.append(f"cooling load qdot_L={qdot_L:.4g} is negative")
    if not u.mdot_lw >= MDOT_MIN:
        out.append(f"coil flow mdot_lw={u.mdot_lw:.4g} must be positive")
    elif not u.mdot_lw <= p.mdot_lw_ub * (1 + 1e-12):
        out.append(f"coil flow mdot_lw={u.mdot_lw:.4g} exceeds mdot_lw_ub={p.mdot_lw_ub:.4g}")
    return out


def coil_capacity(p: CoilParams, u: CoilInput, c_pw: float = C_PW) -> float:
    """Largest heat rate (kW) the water stream can absorb before its outlet
    reaches ``T_lwr_ub``."""
    return c_pw * u.mdot_lw * (p.T_lwr_ub - u.T_lws)


def coil_step(
    p: CoilParams, x: CoilState, u: CoilInput, qdot_L: float, c_pw: float = C_PW
) -> CoilResult:
    violations = coil_violations(p, u, qdot_L)
    if violations:
        raise FeasibilityError(violations)
    capacity = coil_capacity(p, u, c_pw)
    qdot_cc = min(qdot_L, capacity)
    target = qdot_cc / (c_pw * u.mdot_lw) + u.T_lws
    return CoilResult(CoilState(lowpass(p.a_cc, x.T_lwr, target)), qdot_cc, capacity)
