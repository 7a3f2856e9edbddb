"""Command-line entry point: ``ccwp {simulate,demo-saturation,synth,validate-config}``.

Exit codes: 0 success, 2 configuration or input-file error, 3 infeasible
command from the controller, 4 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .chiller import LEGACY, SATURATED
from .controllers import ConstantController, ReplayController, RuleBasedController
from .core import FeasibilityError, SolverError
from .io import ConfigError, SeriesError, load_config, load_series, synth_series, write_series
from .simulate import PLOT_VARIABLES, emit_plot_data, run_closed_loop, run_saturation_demo

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4

log = logging.getLogger("ccwp")


def _controller(kind: str, cfg, args):
    if kind == "rule-based":
        return RuleBasedController(cfg.params, cfg.controller)
    if kind == "constant":
        return ConstantController.all_on(cfg.params, args.constant_flow, cfg.controller.T_chws_set,
                                         cfg.controller.tower_air_fraction)
    if kind == "external-csv":
        if not args.inputs:
            raise ConfigError(["--inputs is required with --controller external-csv"])
        return ReplayController(cfg.params, args.inputs)
    raise ConfigError([f"unknown controller {kind!r}"])


def _simulate_one(cfg, series_path: str, out_dir: Path, args) -> dict:
    series = load_series(series_path)
    ctrl = _controller(args.controller, cfg, args)
    result = run_closed_loop(cfg, series, ctrl, out_dir)
    if args.plots:
        for which in PLOT_VARIABLES:
            emit_plot_data(result, which, out_dir / f"plot_{which}.csv")
    return result.summary


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    out = Path(args.out)
    if args.sweep:
        series_paths = args.sweep
        # each scenario gets its own controller and output directory
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            futures = {
                s: pool.submit(_simulate_one, cfg, s, out / Path(s).stem, args) for s in series_paths
            }
            for s, fut in futures.items():
                summary = fut.result()
                print(f"{s}: COP {summary['plantwide_cop']:.3f}, unmet {summary['unmet_cooling_kWh']:.1f} kWh")
        return EXIT_OK
    if not args.series:
        raise ConfigError(["--series (or --sweep) is required"])
    summary = _simulate_one(cfg, args.series, out, args)
    print(f"steps {summary['n_steps']}, plantwide COP {summary['plantwide_cop']:.3f}, "
          f"unmet {summary['unmet_cooling_kWh']:.1f} kWh, "
          f"max water temperature {summary['max_water_temperature_C']:.2f} C")
    print(f"trace written to {out / 'trace.csv'}")
    return EXIT_OK


def cmd_demo_saturation(args) -> int:
    cfg = load_config(args.config)
    chiller = args.chiller
    if chiller.isdigit():
        chiller = int(chiller) - 1
    points = run_saturation_demo(cfg, chiller, args.fractions, (SATURATED, LEGACY))
    lines = ["flow_fraction,mode,T_cdwr_C,T_chws_C,qdot_evap_kW,steps,converged"]
    for pt in points:
        lines.append(f"{pt.flow_fraction!r},{pt.mode},{pt.T_cdwr!r},{pt.T_chws!r},"
                     f"{pt.qdot_evap!r},{pt.steps},{int(pt.converged)}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.capacity is None:
        capacity = load_config(args.config).params.chiller_capacity
    else:
        capacity = args.capacity
    s = synth_series(args.days, args.t_s, args.peak_fraction, capacity, args.seed)
    write_series(args.out, s)
    print(f"{len(s)} rows written to {args.out} (peak load {s.qdot_L.max():.1f} kW)")
    return EXIT_OK


def cmd_validate_config(args) -> int:
    cfg = load_config(args.config)
    p = cfg.params
    print(f"ok: {p.n_ch} chillers ({p.chiller_capacity:.0f} kW total), {p.n_ct} towers, "
          f"t_s={p.constants.t_s:g} s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccwp", description="Chilled water plant simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def config_arg(p):
        p.add_argument("--config", default=None, help="plant TOML file (default: bundled plant)")

    s = sub.add_parser("simulate", help="closed-loop simulation")
    config_arg(s)
    s.add_argument("--series", help="exogenous CSV (time_s,T_oawb_C,price_per_kWh,qdot_L_kW)")
    s.add_argument("--out", default="out", help="output directory")
    s.add_argument("--controller", choices=["rule-based", "constant", "external-csv"], default="rule-based")
    s.add_argument("--inputs", help="input trace replayed by the external-csv controller")
    s.add_argument("--constant-flow", type=float, default=60.0, help="coil flow for the constant controller")
    s.add_argument("--seed", type=int, default=0, help="unused by built-in controllers; recorded for reproducibility")
    s.add_argument("--sweep", nargs="+", metavar="SERIES", help="run several series in parallel")
    s.add_argument("--workers", type=int, default=4)
    s.add_argument("--plots", action="store_true", help="also write long-format plot data")
    s.set_defaults(func=cmd_simulate)

    d = sub.add_parser("demo-saturation", help="steady-state condenser temperature vs condenser flow")
    config_arg(d)
    d.add_argument("--chiller", default="1", help="chiller index (1-based) or model name")
    d.add_argument("--fractions", type=float, nargs="+", default=[0.1, 0.25, 0.5, 1.0])
    d.add_argument("--out", help="also write the table to this CSV")
    d.set_defaults(func=cmd_demo_saturation)

    g = sub.add_parser("synth", help="generate a synthetic exogenous series")
    config_arg(g)
    g.add_argument("--days", type=float, default=3.0)
    g.add_argument("--t-s", type=float, default=60.0)
    g.add_argument("--peak-fraction", type=float, default=1.3)
    g.add_argument("--capacity", type=float, default=None, help="kW; default: combined chiller capacity")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default="series.csv")
    g.set_defaults(func=cmd_synth)

    v = sub.add_parser("validate-config", help="load and validate a plant configuration")
    config_arg(v)
    v.set_defaults(func=cmd_validate_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except FeasibilityError as exc:
        print(f"infeasible input at step {exc.step}:", file=sys.stderr)
        for v in exc.violations:
            print(f"  {v}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, SeriesError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
