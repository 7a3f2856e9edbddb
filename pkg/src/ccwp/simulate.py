"""Closed-loop runs, the condenser-saturation demonstration, and plot data."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .chiller import LEGACY, SATURATED, ChillerInput, ChillerState, chiller_step
from .controllers import Controller, Observation
from .core import FeasibilityError
from .io import ExogenousSeries, PlantConfig, trace_columns, write_summary, write_trace
from .plant import PlantDisturbance, PlantInput, PlantOutput, PlantState, plant_step, plantwide_cop

# Upper limit for any water temperature in a physically plausible run, degC.
T_WATER_MAX = 48.9


@dataclass
class SimulationResult:
    columns: list[str]
    data: np.ndarray
    summary: dict

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]


def _row(k: int, t: float, x: PlantState, u: PlantInput, w: PlantDisturbance, price: float,
         y: PlantOutput) -> list[float]:
    row = [k, t, *x.as_array(full=True)]
    c = u.chw
    row += [c.mdot_lw, c.mdot_tw, c.T_chws_set]
    for on, m_chws, m_cd in zip(c.on, c.mdot_chws, c.mdot_cd):
        row += [float(on), m_chws, m_cd]
    for on, m_cw, m_oa in zip(u.cw.on, u.cw.mdot_cw, u.cw.mdot_oa):
        row += [float(on), m_cw, m_oa]
    row += [w.qdot_L, w.T_oawb, price]
    a, b = y.chw, y.cw
    row += [a.T_sw, a.T_rw, a.T_chwr_bar, a.T_chws_bar, a.T_lws,
            a.mdot_sw, a.mdot_bp, a.mdot_chw, a.mdot_cd,
            a.qdot_cc, a.qdot_evap, a.qdot_cond, a.P_ch, a.P_chwp,
            b.mdot_cw, b.T_cws_bar, b.T_cwr_bar, b.qdot_ct, b.P_ct, b.P_cwp, y.P_tot]
    return row


def _summary(cfg: PlantConfig, res_cols: list[str], data: np.ndarray, t_s: float) -> dict:
    col = {c: i for i, c in enumerate(res_cols)}
    p = cfg.params
    q_L, q_cc, P = data[:, col["qdot_L"]], data[:, col["qdot_cc"]], data[:, col["P_tot"]]
    unmet = np.maximum(q_L - q_cc, 0.0)
    temps = [c for c in res_cols if c.startswith("T_") and c not in ("T_oawb", "T_chws_set")]
    T = data[:, [col[c] for c in temps]]
    n_ch = p.n_ch
    T_cdwr = data[:, [col[f"T_cdwr_{i}"] for i in range(1, n_ch + 1)]]
    S = data[:, [col["S_twc"], col["S_tww"]]]
    tol = 1e-9
    return {
        "n_steps": int(len(data)),
        "t_s": t_s,
        "plantwide_cop": plantwide_cop(q_cc, P),
        "cooling_delivered_kWh": float(q_cc.sum() * t_s / 3600.0),
        "cooling_demand_kWh": float(q_L.sum() * t_s / 3600.0),
        "unmet_cooling_kWh": float(unmet.sum() * t_s / 3600.0),
        "unmet_steps": int(np.count_nonzero(unmet > 1e-9 * max(1.0, float(q_L.max())))),
        "energy_kWh": float(P.sum() * t_s / 3600.0),
        "max_water_temperature_C": float(T.max()),
        "max_temperatures_C": {c: float(T[:, i].max()) for i, c in enumerate(temps)},
        "violations": {
            "T_lwr_above_ub": int(np.count_nonzero(data[:, col["T_lwr"]] > p.coil.T_lwr_ub + tol)),
            "T_cdwr_above_ub": int(np.count_nonzero(
                T_cdwr > np.array([c.T_cdwr_ub for c in p.chillers]) + tol)),
            "tes_fraction_out_of_bounds": int(np.count_nonzero(
                (S < p.tes.S_lb - tol) | (S > p.tes.S_ub + tol))),
            "water_above_48p9C": int(np.count_nonzero(T > T_WATER_MAX)),
        },
    }


def run_closed_loop(
    cfg: PlantConfig,
    series: ExogenousSeries,
    controller: Controller,
    out_dir: str | Path | None = None,
    x0: PlantState | None = None,
) -> SimulationResult:
    """Step the plant over ``series`` under ``controller``.

    Row ``k`` of the trace holds ``x_k``, ``u_k``, ``w_k`` and the outputs
    of the transition to ``x_{k+1}``. With ``out_dir`` the trace is written
    to ``trace.csv`` and the summary to ``summary.json`` there.

    Raises
    ------
    FeasibilityError
        If the controller issues an infeasible command; ``step`` is set.
    """
    p = cfg.params
    t_s = p.constants.t_s
    if len(series) < 1:
        raise ValueError("series must have at least one row")
    if series.t_s is not None and not math.isclose(series.t_s, t_s, rel_tol=0, abs_tol=1e-9):
        raise ValueError(f"series spacing {series.t_s} s does not match t_s={t_s} s")
    x = x0 if x0 is not None else cfg.initial_state
    columns = trace_columns(p.n_ch, p.n_ct)
    rows = []
    y = None
    for k in range(len(series)):
        w = PlantDisturbance(float(series.qdot_L[k]), float(series.T_oawb[k]))
        obs = Observation(k, float(series.time_s[k]), x, y, w.qdot_L, w.T_oawb,
                          float(series.price[k]), series.price[: k + 1])
        u = controller.step(obs)
        try:
            x_next, y = plant_step(p, x, u, w)
        except FeasibilityError as exc:
            raise FeasibilityError(exc.violations, step=k) from exc
        rows.append(_row(k, float(series.time_s[k]), x, u, w, float(series.price[k]), y))
        x = x_next
    data = np.array(rows, dtype=float)
    result = SimulationResult(columns, data, _summary(cfg, columns, data, t_s))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_trace(out / "trace.csv", columns, rows)
        write_summary(out / "summary.json", result.summary)
    return result


@dataclass(frozen=True)
class SaturationPoint:
    flow_fraction: float
    mode: str
    T_cdwr: float
    T_chws: float
    qdot_evap: float
    steps: int
    converged: bool


def run_saturation_demo(
    cfg: PlantConfig,
    chiller: int | str = 0,
    flow_fractions: Sequence[float] = (0.1, 0.25, 0.5, 1.0),
    modes: Sequence[str] = (SATURATED, LEGACY),
    T_chwr: float = 12.0,
    T_chws_set: float = 7.0,
    T_cdws: float = 29.44,
    tol: float = 1e-6,
    max_steps: int = 200_000,
) -> list[SaturationPoint]:
    """Steady-state condenser outlet temperature versus condenser flow.

    The evaporator side is held at nominal flow with fixed return water and
    setpoint; only the condenser water flow changes. Each point iterates
    the chiller from its nominal state until both temperatures move by less
    than ``tol`` in one step.
    """
    p_all = cfg.params.chillers
    if isinstance(chiller, str):
        names = [c.name for c in p_all]
        if chiller not in names:
            raise ValueError(f"unknown chiller {chiller!r}; available: {names}")
        chiller = names.index(chiller)
    base = p_all[chiller]
    solver, c_pw = cfg.params.solver, cfg.params.constants.c_pw
    out = []
    for frac in flow_fractions:
        if not 0 < frac <= 2:
            raise ValueError(f"flow fraction {frac} outside (0, 2]")
        for mode in modes:
            p = replace(base, mode=mode)
            u = ChillerInput(T_chwr, p.mdot_chw_nom, T_cdws, frac * p.mdot_cd_nom, T_chws_set)
            x = ChillerState(T_chws_set, 35.0)
            converged = False
            r = None
            for n in range(1, max_steps + 1):
                r = chiller_step(p, x, u, solver, c_pw)
                nx = r.next_state
                done = abs(nx.T_cdwr - x.T_cdwr) < tol and abs(nx.T_chws - x.T_chws) < tol
                x = nx
                if done:
                    converged = True
                    break
            out.append(SaturationPoint(frac, mode, x.T_cdwr, x.T_chws, r.qdot_evap, n, converged))
    return out


PLOT_VARIABLES = {
    "exogenous": ["T_oawb", "price", "qdot_L", "qdot_cc"],
    "coil_saturation": ["qdot_L", "qdot_cc", "mdot_lw", "T_lwr", "T_lws"],
    "temperatures": None,  # filled from the trace columns
}


def emit_plot_data(result: SimulationResult, which: str, path: str | Path) -> Path:
    """Write one long-format CSV (``time_s,variable,value``) for a figure."""
    if which not in PLOT_VARIABLES:
        raise ValueError(f"unknown plot {which!r}; choose from {sorted(PLOT_VARIABLES)}")
    names = PLOT_VARIABLES[which]
    if names is None:
        names = [c for c in result.columns
                 if c.startswith(("T_chws_", "T_cdwr_", "T_cws_"))
                 or c in ("T_lwr", "T_twc", "T_tww", "T_chwr_bar", "T_cwr_bar")]
        names = [c for c in names if c != "T_chws_set"]
    t = result.column("time_s")
    path = Path(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["time_s", "variable", "value"])
        for name in names:
            for ti, v in zip(t, result.column(name)):
                w.writerow([repr(float(ti)), name, repr(float(v))])
    return path
