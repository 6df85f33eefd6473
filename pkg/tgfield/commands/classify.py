"""`tgfield classify`: the classify suite with a printed flag table."""
import argparse

from tgfield.commands.common import add_sampling_arguments, add_target_arguments, config_from_args, exit_code
from tgfield.services.suite_service import run_suite, write_result


def register(subparsers):
    parser = subparsers.add_parser("classify", help="Decide class membership of a unit field")
    add_target_arguments(parser)
    add_sampling_arguments(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = config_from_args(args, suite="classify")
    result = run_suite(config)
    path = write_result(result, config.output, config.format)

    print(f"Classification of {config.field} on {config.manifold} ({config.samples} samples)")
    record = result.classification
    if record is not None:
        for name, holds in record.flags().items():
            flag = getattr(record, name)
            defect = "n/a" if flag.max_defect is None else f"{flag.max_defect:.3e}"
            print(f"  {name:<20} {'yes' if holds else 'no ':<4} max defect {defect}")
        for note in record.notes:
            print(f"  note: {note}")
    print(f"Result written to {path}")
    return exit_code(result.verdict)
