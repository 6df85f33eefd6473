"""`tgfield trajectory`: integrate field lines and export them as CSV."""
import argparse
import asyncio

from tgfield.commands.common import (
    add_sampling_arguments,
    add_target_arguments,
    config_from_args,
    exit_code,
    print_checks,
)
from tgfield.services.suite_service import SuiteService, write_result


def register(subparsers):
    parser = subparsers.add_parser("trajectory", help="Integrate integral curves and export CSV files")
    add_target_arguments(parser)
    parser.add_argument("--length", type=float, default=None, help="Parameter length of every curve")
    parser.add_argument("--starts", type=int, default=None, help="Number of start points")
    add_sampling_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = config_from_args(args, suite="trajectory")
    service = SuiteService(config)
    result = asyncio.run(service.run())
    result.outputs = service.export_trajectories(config.output)
    path = write_result(result, config.output, config.format)

    print(f"trajectory on {config.manifold} / {config.field}: {result.verdict}")
    print_checks(result)
    for output in result.outputs:
        print(f"  wrote {output}")
    print(f"Result written to {path}")
    return exit_code(result.verdict)
