"""`tgfield verify`: run one verification suite."""
import argparse
import logging

from tgfield.commands.common import (
    SUITES,
    add_sampling_arguments,
    add_target_arguments,
    config_from_args,
    exit_code,
    print_checks,
)
from tgfield.services.suite_service import run_suite, write_result

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("verify", help="Run one verification suite on a manifold/field pair")
    add_target_arguments(parser)
    parser.add_argument("--suite", required=True, choices=SUITES)
    parser.add_argument("--length", type=float, default=None, help="Trajectory parameter length")
    parser.add_argument("--starts", type=int, default=None, help="Number of trajectory start points")
    add_sampling_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    result = run_suite(config)
    path = write_result(result, config.output, config.format)
    print(f"{config.suite} on {config.manifold} / {config.field}: {result.verdict}")
    print_checks(result)
    print(f"Result written to {path}")
    return exit_code(result.verdict)
