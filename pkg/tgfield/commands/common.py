"""Options and output helpers shared by the command modules."""
import argparse
from typing import Optional

from tgfield.config import settings
from tgfield.models.reports import SuiteConfig, SuiteResult
from tgfield.utils.registry_parser import RegistryParser

SUITES = ("tg", "harmonic", "minimal", "classify", "sff-oracle", "phi-curvature", "trajectory", "properties")


def add_sampling_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--samples", type=int, default=None, help=f"Sample points (default {settings.default_samples})")
    parser.add_argument("--seed", type=int, default=None, help=f"RNG seed (default {settings.default_seed})")
    parser.add_argument(
        "--tol",
        action="append",
        default=[],
        metavar="NAME=VALUE",
        help="Override the tolerance of a check, e.g. --tol MainEq=1e-9 (repeatable)",
    )
    parser.add_argument("--out", type=str, default=None, help="Output file (default under the results directory)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")


def add_target_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--manifold", required=True, help='Manifold key, e.g. "sphere:3" or "warped:0.5,0.785"')
    parser.add_argument("--field", required=True, help='Field key, e.g. "hopf:1" or "flat-tg:1,0"')


def config_from_args(args: argparse.Namespace, suite: Optional[str] = None) -> SuiteConfig:
    """Build a validated SuiteConfig; raises ConfigError or pydantic ValidationError."""
    values = {
        "manifold": args.manifold,
        "field": args.field,
        "suite": suite or args.suite,
        "tolerances": RegistryParser.parse_tolerances(args.tol),
        "output": args.out,
        "format": args.format,
        "length": getattr(args, "length", None),
        "starts": getattr(args, "starts", None),
    }
    if args.samples is not None:
        values["samples"] = args.samples
    if args.seed is not None:
        values["seed"] = args.seed
    return SuiteConfig(**values)


def print_checks(result: SuiteResult):
    for check in result.checks:
        status = "ok  " if check.passed else "FAIL"
        defect = "n/a" if check.max_defect is None else f"{check.max_defect:.3e}"
        line = f"  {status} {check.name:<24} max {defect:>10}  tol {check.tolerance:.1e}"
        if check.note:
            line += f"  ({check.note})"
        print(line)


def exit_code(verdict: str) -> int:
    return 0 if verdict == "pass" else 1
