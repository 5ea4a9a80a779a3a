"""Command-line entry point tying simulation, estimation and benchmarking.

Subcommands:

- ``simulate``: write a measurement-set CSV bundle from a scenario config.
- ``estimate``: run the distance-only or accelerometer-fused estimator on
  a bundle and write the estimate CSV plus diagnostics.
- ``benchmark``: run the paired Monte-Carlo sweep and write the RMSE and
  time-sweep tables.

Output directory resolution: ``--output`` flag, else the
``RELKIN_OUTPUT_DIR`` environment variable, else ``./relkin_out``.
Override precedence: CLI flags beat the config file, which beats the
built-in defaults.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional

from . import bundle_io
from .accel_estimator import estimate_with_accel
from .config import load_scenario
from .distance_estimator import estimate_from_distances
from .errors import ConfigError, RelkinError
from .harness import run_monte_carlo
from .trajectory import simulate_measurements

__all__ = ["main"]

OUTPUT_ENV_VAR = "RELKIN_OUTPUT_DIR"


def _resolve_output(flag_value: Optional[str]) -> Path:
    if flag_value:
        return Path(flag_value)
    env = os.environ.get(OUTPUT_ENV_VAR)
    return Path(env) if env else Path("relkin_out")


def _collect_overrides(args: argparse.Namespace) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got '{item}'")
        key, value = (part.strip() for part in item.split("=", 1))
        overrides[key] = value
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = str(args.seed)
    if getattr(args, "trials", None) is not None:
        overrides["n_trials"] = str(args.trials)
    if getattr(args, "k_sweep", None) is not None:
        overrides["k_sweep"] = args.k_sweep
    return overrides


def _cmd_simulate(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config, _collect_overrides(args))
    meas = simulate_measurements(scenario.sim, scenario.trajectory)
    written = bundle_io.write_measurement_bundle(meas, _resolve_output(args.output))
    for path in written:
        print(path)
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    meas = bundle_io.read_measurement_bundle(args.bundle)
    if args.method == "accel":
        est = estimate_with_accel(meas, args.dim)
    else:
        est = estimate_from_distances(meas, args.dim)
    written = bundle_io.write_estimate(est, _resolve_output(args.output))
    for path in written:
        print(path)
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.config, _collect_overrides(args))
    methods = (args.method,) if args.method else ("distance", "accel")
    result = run_monte_carlo(
        scenario.sim, scenario.trajectory, methods=methods, k_values=scenario.k_sweep
    )
    outdir = _resolve_output(args.output)
    written = [
        bundle_io.write_rmse_table(result.rmse_table, outdir / bundle_io.RMSE_FILE),
        bundle_io.write_time_sweep(result.time_sweep, outdir / bundle_io.TIME_SWEEP_FILE),
    ]
    for path in written:
        print(path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relkin",
        description=(
            "Relative kinematics of a mobile node network from time-varying "
            "pairwise distances, with optional accelerometer fusion."
        ),
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_scenario_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario file (default: bundled scenario)")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument(
            "--set",
            action="append",
            metavar="KEY=VALUE",
            help="override any scenario key (repeatable)",
        )

    p_sim = sub.add_parser("simulate", help="write a measurement-set CSV bundle")
    add_scenario_flags(p_sim)
    p_sim.add_argument("--output", help="output directory")
    p_sim.set_defaults(func=_cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate relative kinematics from a bundle")
    p_est.add_argument("--bundle", required=True, help="directory holding the CSV bundle")
    p_est.add_argument(
        "--method",
        choices=("distance", "accel"),
        default="distance",
        help="estimator: pairwise distances only, or fused with accelerometers",
    )
    p_est.add_argument("--dim", type=int, default=2, help="embedding dimension")
    p_est.add_argument("--output", help="output directory")
    p_est.set_defaults(func=_cmd_estimate)

    p_bench = sub.add_parser("benchmark", help="run the paired Monte-Carlo sweep")
    add_scenario_flags(p_bench)
    p_bench.add_argument("--trials", type=int, help="override the Monte-Carlo trial count")
    p_bench.add_argument(
        "--k-sweep", dest="k_sweep", help="comma-separated sample-count sweep, e.g. 10,20,30"
    )
    p_bench.add_argument(
        "--method",
        choices=("distance", "accel"),
        help="restrict the benchmark to one method (default: both, paired)",
    )
    p_bench.add_argument("--output", help="output directory")
    p_bench.set_defaults(func=_cmd_benchmark)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}", file=sys.stderr)
        return 1
    except RelkinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
