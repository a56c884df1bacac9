"""
Command-line front end.

Subcommands:
    denoise   Denoise a one- or two-column CSV; writes samples CSV + JSON sidecar.
    simulate  Run a simulation grid from a YAML config; writes the report CSV.
    rates     Fit log-log risk slopes over an n-grid (function or l_p-ball mode).
    check     Binomial-bound sweep and prior-condition check.
    signal    Export a test signal (optionally with noise) as CSV.
    history   List recorded simulate/rates runs.

Exit codes: 0 success, 1 I/O failure, 2 validation failure.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence

# Add project root to path (one level up from this file)
root_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if root_dir not in sys.path:
    sys.path.append(root_dir)

from src.config.constants import ALPHA_DEFAULT, DEFAULT_J0, SUPPORTED_FILTERS
from src.config.manager import config_manager
from src.schemas.balls import Zone
from src.services.errors import TestimationError
from src.utils.logger import log, set_level

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _str_list(text: str) -> List[str]:
    return [v.strip() for v in text.split(",") if v.strip()]


# =============================================================================
# Commands
# =============================================================================

def cmd_denoise(args) -> int:
    from src.services.estimators import get_estimator
    from src.services.report_service import denoise_sidecar, read_samples_csv, write_json, write_samples_csv

    t, y = read_samples_csv(args.input)
    estimator = get_estimator(f"map-{args.mode}" if args.mode in ("levelwise", "global") else "universal-hard")
    result = estimator(y, args.filter, args.j0, args.sigma)

    output = Path(args.output) if args.output else Path(args.input).with_suffix(".denoised.csv")
    sidecar = Path(args.sidecar) if args.sidecar else output.with_suffix(".json")
    if result.sigma_hat == 0.0:
        print("warning: estimated noise level is zero; input returned unchanged", file=sys.stderr)
        samples = y
    else:
        samples = result.f_hat
    write_samples_csv(samples, output, t)
    write_json(denoise_sidecar(result, args.filter, args.j0, args.mode, args.sigma is not None), sidecar)
    log.info(f"Denoised {args.input} -> {output} (sidecar {sidecar})")
    print(f"sigma_hat={result.sigma_hat:.6g} surviving_fraction={result.surviving_fraction:.4f}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    from src.services.report_service import load_experiment_config, write_report_csv
    from src.services.simulation_service import SimulationService

    config = load_experiment_config(args.config, config_manager.experiment_defaults())
    if args.workers is not None:
        config.workers = args.workers
    report = SimulationService(workers=config_manager.get_workers()).run(config)
    path = write_report_csv(report, args.output)
    if not args.no_history:
        _record(lambda svc: svc.record_simulation(config, report, str(path)))
    print(f"wrote {len(report.rows)} rows to {path}")
    return EXIT_OK


def cmd_rates(args) -> int:
    from src.config.constants import REPORT_SCHEMA_VERSION
    from src.services.report_service import write_rate_csv
    from src.services.simulation_service import ball_rates, function_rates

    workers = args.workers if args.workers is not None else config_manager.get_workers()
    if args.ball_p is not None:
        rows = ball_rates(
            p=args.ball_p,
            n_grid=args.n_grid,
            eta_p_scale=args.eta_p_scale,
            zone=Zone(args.zone) if args.zone else None,
            q=args.q,
            gamma=args.gamma,
            replications=args.reps,
            seed=args.seed,
            workers=workers,
        )
        settings = {"mode": "ball", "p": args.ball_p, "eta_p_scale": args.eta_p_scale,
                    "zone": args.zone, "q": args.q, "gamma": args.gamma}
    else:
        rows = function_rates(
            signal=args.signal,
            n_grid=args.n_grid,
            orders=args.m,
            estimators=args.estimators,
            rsnr=args.rsnr,
            replications=args.reps,
            seed=args.seed,
            wavelet=args.filter,
            j0=args.j0,
            workers=workers,
        )
        settings = {"mode": "function", "signal": args.signal, "m": args.m,
                    "estimators": args.estimators, "rsnr": args.rsnr,
                    "filter": args.filter, "j0": args.j0}
    settings.update({"n_grid": args.n_grid, "reps": args.reps, "seed": args.seed,
                     "schema_version": REPORT_SCHEMA_VERSION})
    path = write_rate_csv(rows, args.output)
    if not args.no_history:
        _record(lambda svc: svc.record_rates(settings, rows, str(path)))
    for series in sorted({(r.series, r.m, r.slope) for r in rows}):
        print(f"{series[0]} m={series[1]:g}: slope={series[2]:.4f}")
    return EXIT_OK


def cmd_check(args) -> int:
    from src.services.map_core import check_prior_conditions, sweep_binomial_bounds, trunc_geom_prior

    sweep = sweep_binomial_bounds(args.n_max)
    print(
        f"binomial bounds n<= {sweep.n_max}: {sweep.pairs_checked} pairs, "
        f"slack lower={sweep.lower_slack:.3g} upper={sweep.upper_slack:.3g} "
        f"refined={sweep.refined_slack:.3g}"
    )
    prior = trunc_geom_prior(args.n, args.q, args.gamma)
    report = check_prior_conditions(prior, args.beta, args.c0, args.c1, args.c2, args.alpha)
    print(
        f"TrGeom(q={args.q}) n={args.n}: pi(0)={report.zero_mass} "
        f"pi(kappa)={report.sparse_mass} pi(n)={report.full_mass}"
    )
    ok = sweep.holds() and report.all_hold
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_signal(args) -> int:
    from src.services.report_service import write_samples_csv
    from src.services.testbed import add_noise, make_signal, write_signal_csv

    signal = make_signal(args.name, args.n)
    if args.rsnr is None:
        write_signal_csv(signal, args.output)
    else:
        obs = add_noise(signal, args.rsnr, args.seed)
        write_samples_csv(obs.y, args.output, signal.grid)
        print(f"sigma={obs.sigma:.6g}")
    return EXIT_OK


def cmd_history(args) -> int:
    from src.services.run_history_service import RunHistoryService

    for run in RunHistoryService().get_history(args.limit):
        print(f"{run.created_at:%Y-%m-%d %H:%M:%S}  {run.command:<8}  seed={run.seed}  {run.id}  {run.report_path}")
    return EXIT_OK


def _record(action) -> None:
    """History failures never fail the run itself."""
    from src.services.run_history_service import RunHistoryService
    try:
        action(RunHistoryService())
    except Exception as e:
        log.warning(f"Could not record run history: {e}")


# =============================================================================
# Parser
# =============================================================================

def build_parser() -> argparse.ArgumentParser:
    defaults = config_manager.experiment_defaults()
    parser = argparse.ArgumentParser(prog="testimation", description="MAP testimation wavelet toolkit")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="denoise a CSV signal")
    p.add_argument("input")
    p.add_argument("--filter", default=defaults.get("filter", "coif3"), choices=SUPPORTED_FILTERS)
    p.add_argument("--j0", type=int, default=defaults.get("j0", DEFAULT_J0))
    p.add_argument("--sigma", type=float, default=None, help="known noise level (default: MAD estimate)")
    p.add_argument("--mode", choices=["levelwise", "global", "universal"], default="levelwise")
    p.add_argument("--output", default=None)
    p.add_argument("--sidecar", default=None)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("simulate", help="run a simulation grid")
    p.add_argument("config")
    p.add_argument("--output", default="simulation_report.csv")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--no-history", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("rates", help="fit risk-versus-n slopes")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--signal", default="wave")
    mode.add_argument("--ball-p", type=float, default=None, help="l_p-ball mode with this p")
    p.add_argument("--n-grid", type=_int_list, default=[256, 512, 1024, 2048, 4096, 8192])
    p.add_argument("--m", type=_float_list, default=[0.0], help="derivative orders")
    p.add_argument("--estimators", type=_str_list, default=["map-levelwise"])
    p.add_argument("--rsnr", type=float, default=5.0)
    p.add_argument("--filter", default=defaults.get("filter", "coif3"), choices=SUPPORTED_FILTERS)
    p.add_argument("--j0", type=int, default=defaults.get("j0", DEFAULT_J0))
    p.add_argument("--eta-p-scale", type=float, default=64.0, help="ball mode: eta^p = scale / n")
    p.add_argument("--zone", choices=[z.value for z in Zone], default=None)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--reps", type=int, default=50)
    p.add_argument("--seed", type=int, default=defaults.get("seed", 0))
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", default="rate_report.csv")
    p.add_argument("--no-history", action="store_true")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("check", help="binomial bounds and prior conditions")
    p.add_argument("--n-max", type=int, default=2000)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=3.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--c0", type=float, default=3.0)
    p.add_argument("--c1", type=float, default=3.0)
    p.add_argument("--c2", type=float, default=3.0)
    p.add_argument("--alpha", type=float, default=ALPHA_DEFAULT)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("signal", help="export a test signal")
    p.add_argument("name")
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--rsnr", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_signal)

    p = sub.add_parser("history", help="list recorded runs")
    p.add_argument("--limit", type=int, default=10)
    p.set_defaults(func=cmd_history)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        set_level(logging.DEBUG)
    log.debug(f"Starting testimation {args.command}")

    try:
        return args.func(args)
    except TestimationError as e:
        log.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        log.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
