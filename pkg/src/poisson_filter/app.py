import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Optional, Sequence

from poisson_filter import __version__
from poisson_filter.control.config import PRESETS, RunConfig, load_config, load_preset
from poisson_filter.control.controller import Controller
from poisson_filter.exceptions import (
    EXIT_SUCCESS,
    PoissonFilterException,
    PoissonFilterNumericalException,
    PoissonFilterSystemException,
)

logger = logging.getLogger(__name__)

COMMANDS: dict[str, Callable[[Controller], object]] = {
    "derive-params": Controller.cmd_derive_params,
    "steady-state": Controller.cmd_steady_state,
    "simulate": Controller.cmd_simulate,
    "filter": Controller.cmd_filter,
    "benchmark": Controller.cmd_benchmark,
}

HELP = {
    "derive-params": "Print the daily rates derived from the epidemiological inputs",
    "steady-state": "Print closed-form and numeric equilibria",
    "simulate": "Simulate truth and Poisson observations",
    "filter": "Run the configured filters on one simulated trajectory",
    "benchmark": "Noise sweep RMSE and 2-sigma coverage of the configured filters",
}


def _seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {value}")
    return seed


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return number


def _nonnegative(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {value}")
    return number


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    source_group = common.add_argument_group("configuration")
    source = source_group.add_mutually_exclusive_group(required=True)
    source.add_argument("--config", type=Path, help="YAML run configuration")
    source.add_argument("--preset", choices=PRESETS, help="Bundled run configuration")

    override_group = common.add_argument_group("overrides")
    override_group.add_argument("--seed", type=_seed, help="Master random seed")
    override_group.add_argument("--out", type=str, help="Output directory")
    override_group.add_argument("--trials", type=_positive, help="Number of trials")
    override_group.add_argument("--steps", type=_nonnegative, help="Number of time steps")
    override_group.add_argument("--workers", type=_positive, help="Benchmark worker processes")

    logging_group = common.add_argument_group("logging")
    logging_group.add_argument(
        "--log-level",
        type=str.upper,
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Log level",
    )

    parser = argparse.ArgumentParser(
        prog="poisson-filter", description="Poisson Kalman filtering for SIR/SIRH models"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        subparsers.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = load_preset(args.preset) if args.preset else load_config(args.config)
    return config.override(
        seed=args.seed,
        output_dir=args.out,
        n_trials=args.trials,
        n_steps=args.steps,
        workers=args.workers,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=args.log_level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    logger.debug(f"Arguments: {vars(args)}")

    try:
        config = resolve_config(args)
        logger.debug(f"Config: {config}")
        controller = Controller.create_controller(config)
        COMMANDS[args.command](controller)
    except PoissonFilterException as e:
        logger.error(f"{args.command} failed: {e.to_json()}")
        message = e.exception_message
        if isinstance(e, PoissonFilterNumericalException) and e.step is not None:
            message = f"{message} (step {e.step})"
        print(f"error: {message}", file=sys.stderr)
        return e.exception_status
    except Exception as e:
        error = PoissonFilterSystemException(exception_message=f"Error during {args.command}.")
        logger.exception(f"{args.command} failed: {error.to_json()}")
        print(f"error: {error.exception_message} {e}", file=sys.stderr)
        return error.exception_status
    logger.debug(f"{args.command} completed.")
    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())
