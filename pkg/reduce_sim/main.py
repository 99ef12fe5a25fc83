"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from reduce_sim.cli import commands
from reduce_sim.cli.run_config import RunConfig, load_run_config
from reduce_sim.config import DEFAULT_STATISTIC
from reduce_sim.errors import (
    BaselineBelowTargetError,
    ConfigFileError,
    FailureReason,
    IdxFormatError,
    PolicyError,
    ReduceError,
    ShapeMismatchError,
    UncertifiableChipError,
)
from reduce_sim.fleet.policy import Policy
from reduce_sim.resilience.budget import Statistic

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CODES = {
    FailureReason.RATE_BEYOND_PROFILE: 3,
    FailureReason.UNRECOVERABLE: 4,
}
EXIT_IO = 5


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="run configuration JSON")
    common.add_argument("--out", type=Path, help="output directory (overrides config)")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers; never changes results")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="reduce-sim",
        description="Resilience-driven fault-aware retraining for faulty systolic-array chips.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("pretrain", parents=[common], help="train the fault-free network")

    p = sub.add_parser("profile", parents=[common], help="build the resilience table")
    p.add_argument("--params", type=Path, help="pre-trained params (default <out>/params.json)")

    p = sub.add_parser("select", parents=[common], help="print the retraining budget of one chip")
    p.add_argument("--table", type=Path, required=True)
    p.add_argument("--fault-map", type=Path, required=True)
    p.add_argument("--statistic", choices=[s.value for s in Statistic], default=DEFAULT_STATISTIC)

    p = sub.add_parser("retrain", parents=[common], help="fault-aware retraining for one chip")
    p.add_argument("--params", type=Path)
    p.add_argument("--fault-map", type=Path, required=True)
    p.add_argument("--epochs", type=int, required=True)

    p = sub.add_parser("fleet", parents=[common], help="compare policies over a simulated fleet")
    p.add_argument("--params", type=Path)
    p.add_argument("--table", type=Path, help="resilience table (default <out>/resilience_table.json)")
    p.add_argument("--policies", help="comma-separated, e.g. reduce:max,fixed:10")

    p = sub.add_parser("faultmap", parents=[common], help="write a random fault map")
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--map-seed", type=int, default=0)

    return parser


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        raise ConfigFileError(f"{args.command} needs --config")
    cfg = load_run_config(args.config)
    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    return cfg.model_copy(update=overrides) if overrides else cfg


def _dispatch(args: argparse.Namespace) -> int:
    if args.jobs < 1:
        raise ConfigFileError("--jobs must be >= 1")

    if args.command == "select":
        budget = commands.cmd_select(args.table, args.fault_map, args.statistic)
        print(budget)
        return EXIT_OK

    cfg = _load_config(args)
    out = cfg.output_dir
    if args.command == "pretrain":
        commands.cmd_pretrain(cfg)
    elif args.command == "profile":
        commands.cmd_profile(cfg, args.params or out / commands.PARAMS_FILE, args.jobs)
    elif args.command == "retrain":
        commands.cmd_retrain(cfg, args.params or out / commands.PARAMS_FILE, args.fault_map, args.epochs)
    elif args.command == "fleet":
        specs = args.policies.split(",") if args.policies else cfg.fleet.policies
        policies = [Policy.parse(s) for s in specs]
        commands.cmd_fleet(
            cfg,
            args.params or out / commands.PARAMS_FILE,
            args.table or out / commands.TABLE_FILE,
            policies,
            args.jobs,
        )
    elif args.command == "faultmap":
        commands.cmd_faultmap(cfg, args.rate, args.map_seed)
    return EXIT_OK


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the documented process exit code."""
    if isinstance(exc, UncertifiableChipError):
        return EXIT_CODES[exc.reason]
    if isinstance(exc, (ValidationError, ConfigFileError, PolicyError, BaselineBelowTargetError, ShapeMismatchError)):
        return EXIT_USAGE
    if isinstance(exc, (OSError, IdxFormatError, json.JSONDecodeError, KeyError)):
        return EXIT_IO
    if isinstance(exc, (ReduceError, ValueError)):
        return EXIT_USAGE
    raise exc


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return _dispatch(args)
    except Exception as exc:
        code = exit_code_for(exc)
        logger.error("%s failed: %s", args.command, exc)
        return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
