"""Chilled water and cooling water loop algebra.

Primary-secondary pumping: every running chiller carries its nominal
chilled water flow, and a one-way bypass returns whatever the secondary side
(coil plus storage) does not draw. Valve "A" blends storage discharge into
the coil supply, valve "B" blends warm storage water into the plant return.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .core import FeasibilityError


@dataclass(frozen=True)
class ChwLoopInput:
    mdot_lw: float
    mdot_tw: float
    T_chws_set: float
    mdot_chws: tuple[float, ...]
    on: tuple[bool, ...]
    mdot_cd: tuple[float, ...]


@dataclass(frozen=True)
class CwLoopInput:
    on: tuple[bool, ...]
    mdot_cw: tuple[float, ...]
    mdot_oa: tuple[float, ...]


@dataclass(frozen=True)
class ChwLoopOutputs:
    T_sw: float
    T_rw: float
    T_chwr_bar: float
    T_chws_bar: float
    mdot_sw: float
    mdot_bp: float
    mdot_chw: float
    mdot_cd: float
    qdot_cc: float
    qdot_evap: float
    qdot_cond: float
    P_ch: float
    P_chwp: float
    T_lws: float


@dataclass(frozen=True)
class CwLoopOutputs:
    mdot_cw: float
    T_cws_bar: float
    T_cwr_bar: float
    qdot_ct: float
    P_ct: float
    P_cwp: float


@dataclass(frozen=True)
class FlowBalance:
    mdot_chw: float
    mdot_sw: float
    mdot_bp: float
    mdot_rw: float


def _tol(*values: float) -> float:
    return 1e-9 * max(1.0, *(abs(v) for v in values))


def flow_violations(mdot_lw: float, mdot_tw: float, on: Sequence[bool],
                    mdot_chw_nom: Sequence[float]) -> list[str]:
    fb = _balance(mdot_lw, mdot_tw, on, mdot_chw_nom)
    out = []
    if fb.mdot_sw < -_tol(mdot_lw, mdot_tw):
        out.append(
            f"supply water flow mdot_sw={fb.mdot_sw:.6g} is negative "
            f"(storage discharge exceeds coil flow)"
        )
    if fb.mdot_bp < -_tol(fb.mdot_chw, fb.mdot_sw):
        out.append(
            f"bypass flow mdot_bp={fb.mdot_bp:.6g} is negative: secondary demand "
            f"{fb.mdot_sw:.6g} kg/s exceeds primary flow {fb.mdot_chw:.6g} kg/s"
        )
    return out


def _balance(mdot_lw, mdot_tw, on, mdot_chw_nom) -> FlowBalance:
    mdot_chw = sum(m for flag, m in zip(on, mdot_chw_nom) if flag)
    mdot_sw = mdot_lw + mdot_tw
    return FlowBalance(mdot_chw, mdot_sw, mdot_chw - mdot_sw, mdot_sw)


def chw_flow_balance(mdot_lw: float, mdot_tw: float, on: Sequence[bool],
                     mdot_chw_nom: Sequence[float]) -> FlowBalance:
    """Primary, supply, bypass and return flows of the chilled water loop.

    Raises
    ------
    FeasibilityError
        If the secondary side draws more than the running chillers supply,
        or if storage discharge exceeds the coil flow.
    """
    violations = flow_violations(mdot_lw, mdot_tw, on, mdot_chw_nom)
    if violations:
        raise FeasibilityError(violations)
    fb = _balance(mdot_lw, mdot_tw, on, mdot_chw_nom)
    # round-off from an exactly balanced command must not leak a tiny negative flow
    return FlowBalance(fb.mdot_chw, max(fb.mdot_sw, 0.0), max(fb.mdot_bp, 0.0), max(fb.mdot_rw, 0.0))


def mix_T_lws(T_sw: float, T_twc: float, mdot_tw: float, mdot_lw: float, any_chiller_on: bool) -> float:
    """Coil supply temperature after valve A."""
    if not any_chiller_on:
        return T_twc
    return T_sw + min(mdot_tw, 0.0) / mdot_lw * (T_sw - T_twc)


def mix_T_rw(T_lwr: float, T_tww: float, mdot_tw: float, mdot_sw: float, any_chiller_on: bool) -> float:
    """Return water temperature after valve B.

    With no supply flow the mixing weight is undefined and the coil return
    temperature is reported.
    """
    if not any_chiller_on:
        return T_tww
    if mdot_sw <= 0:
        return T_lwr
    return T_lwr + max(mdot_tw, 0.0) / mdot_sw * (T_tww - T_lwr)


def mix_T_chwr(T_rw: float, T_chws_bar: float, mdot_bp: float, mdot_chw: float, any_chiller_on: bool) -> float:
    """Chiller entering water temperature: return water blended with bypass."""
    if not any_chiller_on or mdot_chw <= 0:
        return T_rw
    return T_rw + mdot_bp / mdot_chw * (T_chws_bar - T_rw)


def weighted_avg_temp(temps: Sequence[float], flows: Sequence[float],
                      on_flags: Sequence[bool], fallback: float) -> float:
    """Flow-weighted mean temperature of the active units, or ``fallback``."""
    num = 0.0
    den = 0.0
    for t, m, on in zip(temps, flows, on_flags):
        if on:
            num += t * m
            den += m
    if den <= 0:
        return fallback
    return num / den


def cw_mass_violations(mdot_cd_total: float, mdot_cw_total: float) -> list[str]:
    if abs(mdot_cd_total - mdot_cw_total) > _tol(mdot_cd_total, mdot_cw_total):
        return [
            f"cooling water mass balance: condenser flow {mdot_cd_total:.6g} kg/s "
            f"!= tower flow {mdot_cw_total:.6g} kg/s"
        ]
    return []


def cw_mass_check(mdot_cd_total: float, mdot_cw_total: float) -> None:
    """Raise unless running condensers and running towers carry the same flow."""
    violations = cw_mass_violations(mdot_cd_total, mdot_cw_total)
    if violations:
        raise FeasibilityError(violations)
