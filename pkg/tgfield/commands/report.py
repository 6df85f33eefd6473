"""`tgfield report`: the full battery over every built-in manifold/field pair."""
import argparse
import asyncio
import logging
import sys

from tgfield.commands.common import exit_code
from tgfield.config import settings
from tgfield.services.report_service import ReportService
from tgfield.utils.file_manager import FileManager
from tgfield.utils.registry_parser import RegistryParser

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("report", help="Run every suite on every built-in pair and write one JSON file")
    parser.add_argument("--samples", type=int, default=None, help=f"Sample points per suite (default {settings.default_samples})")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE")
    parser.add_argument("--out", type=str, default=None)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if args.samples is not None and args.samples < 1:
        parser_error = f"--samples must be at least 1, got {args.samples}"
        logger.error(parser_error)
        print(f"error: {parser_error}", file=sys.stderr)
        return 2
    service = ReportService(args.samples, args.seed, RegistryParser.parse_tolerances(args.tol))
    report = asyncio.run(service.run())

    for entry in report.entries:
        status = "ok  " if entry.matches else "FAIL"
        print(f"  {status} {entry.suite:<14} {entry.manifold:<34} {entry.field:<16} {entry.verdict or entry.error}")
    path = FileManager.save_json(
        FileManager.resolve_output(args.out, "report.json"),
        report.model_dump(mode="json"),
    )
    print(f"Battery verdict: {report.verdict}; written to {path}")
    return exit_code(report.verdict)
