"""Command-line entry point: ``deepce {sweep,trace,pilot-savings}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

from ..estimators import LTE_PILOT_RATIO, pilot_savings
from .config import ConfigError, parse_config
from .experiment import format_summary, run_trace, sweep
from .plot import PlotSpec, emit_svg
from .results import emit_csv


def savings_percent(fraction: float) -> int:
    """Whole-percent figure for a savings fraction, rounded up."""
    return math.ceil(round(fraction * 100, 9))


def _overrides(args: argparse.Namespace) -> dict[str, dict[str, str]]:
    ov: dict[str, dict[str, str]] = {}

    def put(section: str, key: str, value) -> None:
        if value is not None:
            ov.setdefault(section, {})[key] = str(value)

    put("experiment", "snr", args.snr)
    put("experiment", "trials", args.trials)
    put("experiment", "seed", args.seed)
    put("experiment", "estimators", args.estimators)
    put("experiment", "workers", args.workers)
    put("channel", "model", args.channel)
    put("dce", "epochs", args.epochs)
    put("output", "csv", args.out_csv)
    put("output", "svg", args.out_svg)
    if args.grid:
        try:
            n_f, n = (int(v) for v in args.grid.lower().split("x"))
        except ValueError:
            raise ConfigError(f"grid: expected NFxN, got {args.grid!r}") from None
        put("grid", "n_f", n_f)
        put("grid", "n", n)
    return ov


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deepce", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file")
    common.add_argument("--snr", help="comma-separated SNR points in dB")
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--channel", help="epa, iid or epa-corr(COEFF)")
    common.add_argument("--estimators", help="comma-separated subset of ls,mmse,dce")
    common.add_argument("--epochs", type=int)
    common.add_argument("--grid", help="grid size as NFxN, e.g. 64x64")
    common.add_argument("--workers", type=int)
    common.add_argument("--out-csv")
    common.add_argument("--out-svg")
    common.add_argument("-v", "--verbose", action="store_true")

    sw = sub.add_parser("sweep", parents=[common], help="NMSE vs SNR Monte-Carlo sweep")
    sw.add_argument("--timings", action="store_true", help="write wall-clock fit seconds to the CSV")

    tr = sub.add_parser("trace", parents=[common], help="fit-loss trace per epoch, EPA vs i.i.d. channel")
    tr.add_argument("--trace-snr", type=float, default=0.0)
    tr.add_argument("--trial", type=int, default=0)

    ps = sub.add_parser("pilot-savings", help="LTE pilot overhead saved by one pilot symbol per grid")
    ps.add_argument("--grid", required=True, help="grid size as NFxN")
    ps.add_argument("--ratio", type=float, default=LTE_PILOT_RATIO, help="LTE pilot density (default 4/84)")
    return parser


def _run(args: argparse.Namespace) -> int:
    if args.command == "pilot-savings":
        try:
            n_f, n = (int(v) for v in args.grid.lower().split("x"))
        except ValueError:
            raise ConfigError(f"grid: expected NFxN, got {args.grid!r}") from None
        frac = pilot_savings(n_f, n, args.ratio)
        print(json.dumps({"n_f": n_f, "n": n, "fraction": frac, "percent": savings_percent(frac)}))
        return 0

    cfg = parse_config(args.config, _overrides(args))
    if args.command == "sweep":
        table = sweep(cfg, progress=args.verbose)
        print(format_summary(table))
        if cfg.out_csv:
            emit_csv(table, cfg.out_csv, timings=args.timings)
        if cfg.out_svg:
            emit_svg(table, cfg.out_svg, PlotSpec(title=f"{cfg.scenario}, {cfg.channel_label}"))
        if table.failures:
            for snr, trial, msg in table.failures:
                print(json.dumps({"error": "TrialError", "snr_db": snr, "trial": trial, "message": msg}),
                      file=sys.stderr)
            return 3
        return 0

    traces = run_trace(cfg, args.trace_snr, args.trial)
    for name, t in traces.items():
        print(f"{name}: initial mse {t.mse_per_epoch[0]:.5g}, final mse {t.final_mse:.5g}")
    if cfg.out_csv:
        with open(cfg.out_csv, "w") as fh:
            names = list(traces)
            fh.write("epoch," + ",".join(names) + "\n")
            for e in range(len(traces[names[0]].mse_per_epoch)):
                fh.write(f"{e}," + ",".join(repr(float(traces[n].mse_per_epoch[e])) for n in names) + "\n")
    if cfg.out_svg:
        emit_svg(traces, cfg.out_svg, PlotSpec(title=f"fit loss at {args.trace_snr:g} dB", xlabel="epoch",
                                                ylabel="MSE", log_y=True))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as err:
        print(json.dumps({"error": "ConfigError", "message": str(err)}), file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as err:
        print(json.dumps({"error": type(err).__name__, "message": str(err)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
