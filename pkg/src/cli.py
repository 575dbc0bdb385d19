"""
Command-line interface

    morpho dilate|erode|open|close --input F --output F --se K --method M [--1h-weight diff|avg]
    morpho experiment {dilation-cmp|closing-cmp|component-trace|idempotence} [--seed N] [--count N]
                      [--size N] [--se K] [--out DIR] [--input F ...]

Exit codes: 0 success, 2 bad arguments or unsupported request, 3 I/O failure,
1 any other toolkit failure. Environment (also read from a .env file):
MORPHO_OUTPUT_DIR, MORPHO_LOG_DIR, MORPHO_WORKERS, MORPHO_LOG_LEVEL.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv

from config.experiment_configs import get_all_experiment_ids
from src.distance import DistanceKind, OneHWeight
from src.error_recovery import (
    DomainError,
    ErrorLogger,
    ImageIOError,
    MorphologyError,
    UnsupportedFeatureError,
)
from src.experiments import ExperimentConfig, run_experiment
from src.image_io import load_png, save_png
from src.morphology import METHODS, OPERATIONS, apply_operation, make_square_se

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _env_int(name: str, default: int) -> int:
    value = os.getenv(name)
    if value is None or value == "":
        return default
    try:
        return int(value)
    except ValueError:
        raise DomainError(f"{name} must be an integer, got '{value}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="morpho",
        description="Colour morphology with the log-exp-supremum (DLES) ordering"
    )
    parser.add_argument(
        "--log-level",
        default=os.getenv("MORPHO_LOG_LEVEL", "INFO"),
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        type=str.upper,
        help="Logging verbosity (default: $MORPHO_LOG_LEVEL or INFO)"
    )
    parser.add_argument("--workers", type=int, default=None, help="Worker threads (default: $MORPHO_WORKERS or 1)")
    subparsers = parser.add_subparsers(dest="command", required=True)

    for operation in OPERATIONS:
        op_parser = subparsers.add_parser(operation, help=f"{operation.capitalize()} an 8-bit RGB PNG")
        op_parser.add_argument("--input", required=True, type=Path, help="Input PNG")
        op_parser.add_argument("--output", required=True, type=Path, help="Output PNG")
        op_parser.add_argument("--se", required=True, type=int, help="Square SE side length (odd)")
        op_parser.add_argument("--method", required=True, choices=list(METHODS), help="Ordering / baseline")
        op_parser.add_argument(
            "--1h-weight", dest="one_h_weight", default=OneHWeight.DIFF.value,
            choices=[w.value for w in OneHWeight], help="Hue weight of the 1H distance"
        )

    exp_parser = subparsers.add_parser("experiment", help="Run a preset experiment")
    exp_parser.add_argument("experiment_id", choices=get_all_experiment_ids())
    exp_parser.add_argument("--seed", type=int, default=None, help="Random-image seed")
    exp_parser.add_argument("--count", type=int, default=None, help="Number of random images")
    exp_parser.add_argument("--size", type=int, default=None, help="Random image side length")
    exp_parser.add_argument("--se", type=int, default=None, help="Square SE side length (odd)")
    exp_parser.add_argument("--out", type=Path, default=None, help="Output directory")
    exp_parser.add_argument("--input", type=Path, nargs="+", default=None, help="Input PNG(s)")
    exp_parser.add_argument(
        "--kinds", nargs="+", default=None, choices=[k.value for k in DistanceKind],
        help="Distance kinds to run (default: all three)"
    )
    exp_parser.add_argument(
        "--1h-weight", dest="one_h_weight", default=OneHWeight.DIFF.value,
        choices=[w.value for w in OneHWeight], help="Hue weight of the 1H distance"
    )
    return parser


def _run_operation(args: argparse.Namespace, workers: int) -> None:
    se = make_square_se(args.se)
    image = load_png(args.input)
    result = apply_operation(
        args.command, image, se, args.method, OneHWeight(args.one_h_weight), workers
    )
    save_png(result, args.output)
    logger.info(f"✓ {args.command} ({args.method}, SE {args.se}x{args.se}) -> {args.output}")


def _run_experiment(args: argparse.Namespace, workers: int) -> None:
    out = args.out or Path(os.getenv("MORPHO_OUTPUT_DIR", "output")) / args.experiment_id
    cfg = ExperimentConfig.from_preset(
        args.experiment_id,
        out,
        se_size=args.se,
        seed=args.seed,
        count=args.count,
        size=args.size,
        input_paths=tuple(args.input) if args.input else None,
        kinds=tuple(args.kinds) if args.kinds else None,
        one_h_weight=OneHWeight(args.one_h_weight),
        workers=workers,
    )
    run_experiment(cfg)
    logger.info(f"✓ Experiment {cfg.experiment_id} complete, outputs in {cfg.output_dir}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK

    logging.basicConfig(level=getattr(logging, args.log_level), format="%(levelname)s %(name)s: %(message)s")

    component = f"cli.{args.command}"
    try:
        workers = args.workers if args.workers is not None else _env_int("MORPHO_WORKERS", 1)
        if workers < 1:
            raise DomainError(f"--workers must be >= 1, got {workers}")
        if args.command == "experiment":
            _run_experiment(args, workers)
        else:
            _run_operation(args, workers)
        return EXIT_OK
    except (DomainError, UnsupportedFeatureError) as e:
        _report(component, e, args)
        return EXIT_USAGE
    except ImageIOError as e:
        _report(component, e, args)
        return EXIT_IO
    except MorphologyError as e:
        _report(component, e, args)
        return EXIT_FAILURE


def _report(component: str, exc: MorphologyError, args: argparse.Namespace) -> None:
    print(f"morpho: error: {exc}", file=sys.stderr)
    context = {key: str(value) for key, value in vars(args).items()}
    ErrorLogger(log_dir=os.getenv("MORPHO_LOG_DIR", "output/logs")).log_exception(component, exc, context)
