"""Configuration loading, exogenous series, and simulation traces.

Plant configurations are TOML files. Chiller and tower entries either name a
coefficient set from the bundled ``data/coefficients.toml`` (``model = ...``)
or carry their coefficients inline. Any parameter left out falls back to the
plant-wide defaults in :data:`DEFAULTS`.
"""

from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

from .chiller import SATURATED, ChillerParams, ChillerState
from .coil import CoilParams, CoilState
from .core import CCWPError, ParameterError, SimConstants, filter_from_time_constant
from .optim import SolverSettings
from .plant import PlantParams, PlantState
from .tes import TesParams, TesState
from .tower import TowerParams, TowerState

# Plant-wide defaults for anything a configuration omits.
DEFAULTS: dict[str, float] = {
    "T_lwr_ub": 15.0,
    "S_lb": 0.05,
    "S_ub": 0.95,
    "M_tes": 1.413e5,
    "T_app_lb": 0.0,
    "T_app_ub": 40.0,
    "T_ran_lb": 2.2,
    "T_ran_ub": 22.2,
    "mdot_cd_nom": 47.44,
    "T_chws_ub": 10.0,
    "T_cdws_lb": 15.0,
    "T_cdws_ub": 40.0,
    "T_cwr_ub": 40.0,
    "T_cdwr_nom": 35.0,
    "T_cdwr_ub": 40.0,
    "T_chws_lb": 5.0,
}

SERIES_HEADER = ("time_s", "T_oawb_C", "price_per_kWh", "qdot_L_kW")


class ConfigError(CCWPError, ValueError):
    """Configuration could not be parsed or failed validation.

    ``errors`` lists every problem found, not just the first.
    """

    def __init__(self, errors: Sequence[str], path: str | None = None):
        self.errors = list(errors)
        self.path = path
        where = f"{path}: " if path else ""
        super().__init__(where + "; ".join(self.errors))


class SeriesError(CCWPError, ValueError):
    pass


@dataclass(frozen=True)
class RuleBasedConfig:
    """Tuning of the built-in rule-based supervisory controller."""

    T_chws_set: float = 7.0
    price_quantile: float = 0.5
    price_window_h: float = 24.0
    staging_margin: float = 1.1
    tes_charge_flow: float = 15.0
    tes_discharge_flow: float = 20.0
    tes_margin: float = 0.02
    tower_air_fraction: float = 0.8
    T_lwr_target: float = 13.0
    mdot_lw_min: float = 5.0

    def violations(self) -> list[str]:
        out = []
        if not 0.0 <= self.price_quantile <= 1.0:
            out.append("controller.price_quantile must lie in [0, 1]")
        if not self.price_window_h > 0:
            out.append("controller.price_window_h must be positive")
        if not self.staging_margin >= 1.0:
            out.append("controller.staging_margin must be at least 1")
        if not (self.tes_charge_flow >= 0 and self.tes_discharge_flow >= 0):
            out.append("controller TES flows must be nonnegative")
        if not self.tes_margin >= 0:
            out.append("controller.tes_margin must be nonnegative")
        if not 0.0 < self.tower_air_fraction <= 1.0:
            out.append("controller.tower_air_fraction must lie in (0, 1]")
        if not self.mdot_lw_min > 0:
            out.append("controller.mdot_lw_min must be positive")
        return out


@dataclass(frozen=True)
class PlantConfig:
    params: PlantParams
    initial_state: PlantState
    controller: RuleBasedConfig = field(default_factory=RuleBasedConfig)
    source: str = ""


# ---------------------------------------------------------------- coefficients


def _read_toml_text(text: str, origin: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # the decoder message already carries "(at line L, column C)"
        raise ConfigError([f"parse error: {exc}"], origin) from exc


def load_coefficients(path: str | Path | None = None) -> dict:
    """Named chiller and tower coefficient sets.

    Without ``path`` the bundled dataset is used.
    """
    if path is None:
        text = resources.files("ccwp").joinpath("data/coefficients.toml").read_text()
        origin = "coefficients.toml"
    else:
        text = Path(path).read_text()
        origin = str(path)
    data = _read_toml_text(text, origin)
    return {"chillers": data.get("chillers", {}), "towers": data.get("towers", {})}


def default_config_path() -> Path:
    return Path(str(resources.files("ccwp").joinpath("data/default_plant.toml")))


# ---------------------------------------------------------------- config


class _Collector:
    """Accumulate validation errors so they are all reported together."""

    def __init__(self):
        self.errors: list[str] = []

    def num(self, table: Mapping, key: str, where: str, default: Any = None, required: bool = False):
        if key not in table:
            if required and default is None:
                self.errors.append(f"{where}.{key} is required")
                return math.nan
            return default
        v = table[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.errors.append(f"{where}.{key} must be a number, got {v!r}")
            return math.nan
        if not math.isfinite(v):
            self.errors.append(f"{where}.{key} must be finite")
        return float(v)

    def vec(self, table: Mapping, key: str, where: str, n: int, default=None):
        if key not in table:
            if default is None:
                self.errors.append(f"{where}.{key} is required")
                return (math.nan,) * n
            return tuple(default)
        v = table[key]
        if not isinstance(v, list) or len(v) != n or not all(
            isinstance(e, (int, float)) and not isinstance(e, bool) for e in v
        ):
            self.errors.append(f"{where}.{key} must be a list of {n} numbers")
            return (math.nan,) * n
        return tuple(float(e) for e in v)

    def build(self, cls, where: str, **kwargs):
        try:
            return cls(**kwargs)
        except (ParameterError, TypeError) as exc:
            self.errors.append(f"{where}: {exc}")
            return None


def _merged(entry: Mapping, library: Mapping, kind: str, where: str, col: _Collector) -> dict:
    name = entry.get("model")
    if name is None:
        return dict(entry)
    if name not in library:
        col.errors.append(f"{where}: unknown {kind} coefficient set {name!r}")
        return dict(entry)
    merged = dict(library[name])
    merged.update({k: v for k, v in entry.items() if k != "model"})
    merged["name"] = name
    return merged


def _chiller(entry: Mapping, t_s: float, where: str, col: _Collector, library) -> ChillerParams | None:
    d = _merged(entry, library, "chiller", where, col)
    q_nom = col.num(d, "qdot_evap_nom", where, required=True)
    if "P_ch_nom" in d:
        P_nom = col.num(d, "P_ch_nom", where)
    else:
        cop = col.num(d, "cop_nom", where, required=True)
        P_nom = q_nom / cop if cop and cop > 0 else math.nan
        if not (cop and cop > 0):
            col.errors.append(f"{where}.cop_nom must be positive")
    tau_ch = col.num(d, "tau_ch", where, default=0.0)
    tau_cd = col.num(d, "tau_cd", where, default=0.0)
    try:
        a_ch = filter_from_time_constant(tau_ch, t_s)
        a_cd = filter_from_time_constant(tau_cd, t_s)
    except ParameterError as exc:
        col.errors.append(f"{where}: {exc}")
        a_ch = a_cd = 0.0
    if col.errors:
        return None
    return col.build(
        ChillerParams,
        where,
        qdot_evap_nom=q_nom,
        P_ch_nom=P_nom,
        alpha=col.vec(d, "alpha", where, 6),
        beta=col.vec(d, "beta", where, 6),
        gamma_plr=col.vec(d, "gamma_plr", where, 3),
        a_ch=a_ch,
        a_cd=a_cd,
        mdot_chw_nom=col.num(d, "mdot_chw_nom", where, required=True),
        mdot_cd_nom=col.num(d, "mdot_cd_nom", where, default=DEFAULTS["mdot_cd_nom"]),
        plr_lb=col.num(d, "plr_lb", where, default=0.1),
        plr_ub=col.num(d, "plr_ub", where, default=1.0),
        eta1=col.num(d, "eta1", where, default=1.0),
        T_chws_lb=col.num(d, "T_chws_lb", where, default=DEFAULTS["T_chws_lb"]),
        T_cdwr_ub=col.num(d, "T_cdwr_ub", where, default=DEFAULTS["T_cdwr_ub"]),
        pump_a=col.vec(d, "pump_a", where, 4, default=(0.0, 0.0, 0.0, 0.0)),
        mode=d.get("mode", SATURATED),
        name=str(d.get("name", "")),
    )


def _tower(entry: Mapping, t_s: float, where: str, col: _Collector, library) -> TowerParams | None:
    d = _merged(entry, library, "tower", where, col)
    try:
        a_ct = filter_from_time_constant(col.num(d, "tau", where, default=0.0), t_s)
    except ParameterError as exc:
        col.errors.append(f"{where}: {exc}")
        a_ct = 0.0
    c = col.vec(d, "c", where, 27)
    if col.errors:
        return None
    return col.build(
        TowerParams,
        where,
        c=c,
        mdot_cw_nom=col.num(d, "mdot_cw_nom", where, required=True),
        mdot_oa_nom=col.num(d, "mdot_oa_nom", where, required=True),
        a_ct=a_ct,
        P_ct_nom=col.num(d, "P_ct_nom", where, required=True),
        lgr_ub=col.num(d, "lgr_ub", where, default=8.0),
        T_ran_lb=col.num(d, "T_ran_lb", where, default=DEFAULTS["T_ran_lb"]),
        T_ran_ub=col.num(d, "T_ran_ub", where, default=DEFAULTS["T_ran_ub"]),
        T_app_lb=col.num(d, "T_app_lb", where, default=DEFAULTS["T_app_lb"]),
        T_app_ub=col.num(d, "T_app_ub", where, default=DEFAULTS["T_app_ub"]),
        pump_g=col.vec(d, "pump_g", where, 4, default=(0.0, 0.0, 0.0, 0.0)),
        name=str(d.get("name", "")),
    )


def _initial_state(d: Mapping, n_ch: int, n_ct: int, col: _Collector) -> PlantState | None:
    w = "initial_state"
    T_lwr = col.num(d, "T_lwr", w, default=12.0)
    T_twc = col.num(d, "T_twc", w, default=6.0)
    S_twc = col.num(d, "S_twc", w, default=0.5)
    T_tww = col.num(d, "T_tww", w, default=13.0)
    S_tww = col.num(d, "S_tww", w, default=1.0 - S_twc)
    T_chws = col.vec(d, "T_chws", w, n_ch, default=(7.0,) * n_ch)
    T_cdwr = col.vec(d, "T_cdwr", w, n_ch, default=(DEFAULTS["T_cdwr_nom"],) * n_ch)
    T_cws = col.vec(d, "T_cws", w, n_ct, default=(29.0,) * n_ct)
    if abs(S_twc + S_tww - 1.0) > 1e-12:
        col.errors.append(f"{w}: S_twc + S_tww must equal 1, got {S_twc + S_tww!r}")
    return PlantState(
        CoilState(T_lwr),
        TesState(T_twc, S_twc, T_tww, S_tww),
        tuple(ChillerState(a, b) for a, b in zip(T_chws, T_cdwr)),
        tuple(TowerState(t) for t in T_cws),
    )


def parse_config(data: Mapping, source: str = "", coefficients: Mapping | None = None) -> PlantConfig:
    """Validate a parsed configuration mapping; see :func:`load_config`."""
    lib = coefficients if coefficients is not None else load_coefficients()
    col = _Collector()

    sim = data.get("simulation", {})
    t_s = col.num(sim, "t_s", "simulation", default=60.0)
    c_pw = col.num(sim, "c_pw", "simulation", default=4.186)
    constants = col.build(SimConstants, "simulation", c_pw=c_pw, t_s=t_s)
    if constants is None:
        raise ConfigError(col.errors, source)

    sol = data.get("solver", {})
    solver = col.build(
        SolverSettings,
        "solver",
        grid_points=int(col.num(sol, "grid_points", "solver", default=257)),
        refine_tol=col.num(sol, "refine_tol", "solver", default=1e-7),
        max_refine_iters=int(col.num(sol, "max_refine_iters", "solver", default=100)),
    )

    cd = data.get("coil", {})
    if "a_cc" in cd:
        a_cc = col.num(cd, "a_cc", "coil")
    else:
        try:
            a_cc = filter_from_time_constant(col.num(cd, "tau", "coil", default=300.0), t_s)
        except ParameterError as exc:
            col.errors.append(f"coil: {exc}")
            a_cc = 0.0
    coil = col.build(
        CoilParams,
        "coil",
        a_cc=a_cc,
        mdot_lw_ub=col.num(cd, "mdot_lw_ub", "coil", required=True),
        T_lwr_ub=col.num(cd, "T_lwr_ub", "coil", default=DEFAULTS["T_lwr_ub"]),
    )

    td = data.get("tes", {})
    tes = col.build(
        TesParams,
        "tes",
        M_tes=col.num(td, "M_tes", "tes", default=DEFAULTS["M_tes"]),
        S_lb=col.num(td, "S_lb", "tes", default=DEFAULTS["S_lb"]),
        S_ub=col.num(td, "S_ub", "tes", default=DEFAULTS["S_ub"]),
    )

    chiller_entries = data.get("chillers", [])
    tower_entries = data.get("towers", [])
    if not chiller_entries:
        col.errors.append("at least one [[chillers]] entry is required")
    if not tower_entries:
        col.errors.append("at least one [[towers]] entry is required")

    chillers, towers = [], []
    for i, e in enumerate(chiller_entries):
        sub = _Collector()
        chillers.append(_chiller(e, t_s, f"chillers[{i}]", sub, lib["chillers"]))
        col.errors += sub.errors
    for j, e in enumerate(tower_entries):
        sub = _Collector()
        towers.append(_tower(e, t_s, f"towers[{j}]", sub, lib["towers"]))
        col.errors += sub.errors

    ctrl_d = dict(data.get("controller", {}))
    known = {f.name for f in fields(RuleBasedConfig)}
    unknown = sorted(set(ctrl_d) - known)
    if unknown:
        col.errors.append(f"controller: unknown keys {unknown}")
    ctrl = RuleBasedConfig(**{k: col.num(ctrl_d, k, "controller") for k in ctrl_d if k in known})
    col.errors += ctrl.violations()

    T_cwr_nom = col.num(data.get("loops", {}), "T_cwr_nom", "loops", default=DEFAULTS["T_cdwr_nom"])
    x0 = _initial_state(data.get("initial_state", {}), len(chiller_entries), len(tower_entries), col)
    if tes is not None and x0 is not None:
        for name in ("S_twc", "S_tww"):
            s = getattr(x0.tes, name)
            if not tes.S_lb <= s <= tes.S_ub:
                col.errors.append(f"initial_state.{name}={s} outside [{tes.S_lb}, {tes.S_ub}]")

    if col.errors or None in chillers or None in towers or None in (coil, tes, solver):
        raise ConfigError(col.errors or ["invalid configuration"], source)
    params = PlantParams(
        coil=coil,
        tes=tes,
        chillers=tuple(chillers),
        towers=tuple(towers),
        constants=constants,
        solver=solver,
        T_cwr_nom=T_cwr_nom,
    )
    return PlantConfig(params, x0, ctrl, source)


def load_config(path: str | Path | None = None) -> PlantConfig:
    """Load and validate a plant configuration file.

    Parameters
    ----------
    path
        TOML file; ``None`` loads the bundled two-chiller, two-tower plant.

    Raises
    ------
    ConfigError
        On a parse error (message includes line and column) or when
        validation fails; ``errors`` lists every failure.
    """
    p = default_config_path() if path is None else Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc.strerror}"], str(p)) from exc
    return parse_config(_read_toml_text(text, str(p)), str(p))


def with_chiller_mode(cfg: PlantConfig, mode: str) -> PlantConfig:
    """Copy of ``cfg`` with every chiller switched to ``mode``."""
    from dataclasses import replace

    chillers = tuple(replace(c, mode=mode) for c in cfg.params.chillers)
    return replace(cfg, params=replace(cfg.params, chillers=chillers))


# ---------------------------------------------------------------- series


@dataclass(frozen=True)
class ExogenousSeries:
    time_s: np.ndarray
    T_oawb: np.ndarray
    price: np.ndarray
    qdot_L: np.ndarray

    def __post_init__(self):
        n = len(self.time_s)
        if not (len(self.T_oawb) == len(self.price) == len(self.qdot_L) == n):
            raise SeriesError("series columns must have equal lengths")
        if n == 0:
            raise SeriesError("series is empty")
        for name in ("time_s", "T_oawb", "price", "qdot_L"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise SeriesError(f"series column {name} contains non-finite values")
        if np.any(self.qdot_L < 0):
            k = int(np.flatnonzero(self.qdot_L < 0)[0])
            raise SeriesError(f"negative cooling load {self.qdot_L[k]} at row {k}")
        if n > 1:
            dt = np.diff(self.time_s)
            if not (dt[0] > 0 and np.all(dt == dt[0])):
                k = int(np.flatnonzero(dt != dt[0])[0]) if np.any(dt != dt[0]) else 0
                raise SeriesError(f"time stamps are not uniformly spaced (row {k + 1})")

    def __len__(self):
        return len(self.time_s)

    @property
    def t_s(self) -> float | None:
        return float(self.time_s[1] - self.time_s[0]) if len(self) > 1 else None


def load_series(path: str | Path) -> ExogenousSeries:
    """Read an exogenous CSV with header ``time_s,T_oawb_C,price_per_kWh,qdot_L_kW``."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(line for line in f if not line.startswith("#"))
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != SERIES_HEADER:
            raise SeriesError(f"{path}: expected header {','.join(SERIES_HEADER)}, got {header}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise SeriesError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise SeriesError(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise SeriesError(f"{path}: no data rows")
    a = np.array(rows, dtype=float)
    return ExogenousSeries(a[:, 0], a[:, 1], a[:, 2], a[:, 3])


def write_series(path: str | Path, s: ExogenousSeries) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(SERIES_HEADER)
        for row in zip(s.time_s, s.T_oawb, s.price, s.qdot_L):
            w.writerow([_fmt(v) for v in row])


def synth_series(days: float, t_s: float = 60.0, peak_fraction: float = 1.3,
                 capacity: float = 2923.0, seed: int = 0) -> ExogenousSeries:
    """Synthetic wet-bulb, price and load signals.

    The wet-bulb swings 24 +/- 4 degC daily with its peak mid-afternoon; the
    price is a two-tier day/night tariff with small noise; the load follows a
    daytime bump plus noise and is scaled so its maximum equals
    ``peak_fraction * capacity``.
    """
    if not days >= 1:
        raise SeriesError("days must be at least 1")
    if not t_s > 0:
        raise SeriesError("t_s must be positive")
    if not peak_fraction >= 0:
        raise SeriesError("peak_fraction must be nonnegative")
    n = int(round(days * 86400.0 / t_s))
    rng = np.random.default_rng(seed)
    time_s = np.arange(n, dtype=float) * t_s
    hour = (time_s / 3600.0) % 24.0
    day = np.floor(time_s / 86400.0)

    T_oawb = 24.0 + 4.0 * np.sin(2 * np.pi * (hour - 9.0) / 24.0)

    on_peak = (hour >= 8.0) & (hour < 20.0)
    price = np.where(on_peak, 0.12, 0.05) + 0.005 * rng.standard_normal(n)
    price = np.maximum(price, 0.0)

    day_scale = 1.0 + 0.05 * rng.standard_normal(int(day.max()) + 1 if n else 1)
    bump = np.exp(-0.5 * ((hour - 15.0) / 3.5) ** 2)
    raw = (0.35 + 0.65 * bump) * day_scale[day.astype(int)]
    raw = raw * (1.0 + 0.02 * rng.standard_normal(n))
    raw = np.maximum(raw, 0.0)
    peak = raw.max() if n else 0.0
    qdot_L = raw * (peak_fraction * capacity / peak) if peak > 0 else np.zeros(n)
    return ExogenousSeries(time_s, T_oawb, price, qdot_L)


# ---------------------------------------------------------------- traces


def _fmt(v) -> str:
    """Shortest decimal text that round-trips to the same float."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    return repr(float(v))


def trace_columns(n_ch: int, n_ct: int) -> list[str]:
    """Column order of trace files: step, state, input, disturbance, output."""
    cols = ["k", "time_s"]
    cols += ["T_lwr", "T_twc", "S_twc", "T_tww", "S_tww"]
    for i in range(1, n_ch + 1):
        cols += [f"T_chws_{i}", f"T_cdwr_{i}"]
    cols += [f"T_cws_{j}" for j in range(1, n_ct + 1)]
    cols += ["mdot_lw", "mdot_tw", "T_chws_set"]
    for i in range(1, n_ch + 1):
        cols += [f"on_ch_{i}", f"mdot_chws_{i}", f"mdot_cd_{i}"]
    for j in range(1, n_ct + 1):
        cols += [f"on_ct_{j}", f"mdot_cw_{j}", f"mdot_oa_{j}"]
    cols += ["qdot_L", "T_oawb", "price"]
    cols += [
        "T_sw", "T_rw", "T_chwr_bar", "T_chws_bar", "T_lws",
        "mdot_sw", "mdot_bp", "mdot_chw", "mdot_cd",
        "qdot_cc", "qdot_evap", "qdot_cond", "P_ch", "P_chwp",
        "mdot_cw", "T_cws_bar", "T_cwr_bar", "qdot_ct", "P_ct", "P_cwp", "P_tot",
    ]
    return cols


def write_trace(path: str | Path, columns: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    """Write a trace CSV; floats use round-trip (17 significant digit) text."""
    with open(path, "w", newline="") as f:
        f.write("# ccwp trace: one row per step; columns are step index, state x_k, input u_k,\n")
        f.write("# disturbance w_k and outputs y_k. Units: degC, kg/s, kW, currency/kWh.\n")
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_trace(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as f:
        reader = csv.reader(line for line in f if not line.startswith("#"))
        columns = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    return columns, data.reshape(-1, len(columns))


def write_summary(path: str | Path, summary: Mapping) -> None:
    with open(path, "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
