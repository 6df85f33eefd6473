"""Command-line verbs; each module exposes register(subparsers)."""
from . import classify, report, trajectory, verify

COMMANDS = (verify, classify, trajectory, report)

__all__ = ["COMMANDS", "classify", "report", "trajectory", "verify"]
