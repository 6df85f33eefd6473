"""Command-line entry point."""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from tgfield.commands import COMMANDS
from tgfield.config import settings
from tgfield.utils.errors import ConfigError

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log.upper(), logging.WARNING),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)

logger = logging.getLogger(__name__)

USAGE_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tgfield",
        description="Numerical verification of totally geodesic unit vector fields",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run the selected command.

    Returns:
        0 when every check passed, 1 when a check failed, 2 on usage or configuration errors
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else USAGE_ERROR

    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR
    except ValidationError as e:
        logger.error(f"Invalid configuration: {e}")
        print(f"error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
