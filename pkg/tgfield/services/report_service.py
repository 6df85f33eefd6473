"""The full acceptance battery run by `tgfield report`."""
import math
from typing import Callable, Dict, List, Optional, Tuple
import logging

from tgfield.config import settings
from tgfield.models.reports import BatteryEntry, BatteryReport, SuiteConfig
from tgfield.services.suite_service import SuiteService
from tgfield.utils.errors import ConfigError

logger = logging.getLogger(__name__)

HOPF_FLAGS = {
    "geodesic": True,
    "killing": True,
    "covariantly_normal": True,
    "strongly_normal": True,
    "invariant": True,
    "holonomic": False,
}
PARALLEL_FLAGS = {
    "geodesic": True,
    "killing": True,
    "covariantly_normal": True,
    "strongly_normal": True,
    "holonomic": True,
    "invariant": False,
}
RADIAL_FLAGS = {"holonomic": True, "killing": False}

QUARTER_PI = f"{math.pi / 4!r}"
THIRD_PI = f"{math.pi / 3!r}"

# (manifold, field, suites, expected classification flags)
BATTERY: List[Tuple[str, str, Tuple[str, ...], Dict[str, bool]]] = [
    (
        "sphere:3",
        "hopf:1",
        ("tg", "harmonic", "minimal", "classify", "sff-oracle", "phi-curvature", "properties"),
        HOPF_FLAGS,
    ),
    ("sphere:5", "hopf:2", ("tg", "classify", "properties"), HOPF_FLAGS),
    ("sphere:2", "coord-unit:1", ("sff-oracle", "properties"), {}),
    (f"warped:0.5,{QUARTER_PI}", "tg2d:0.5,0", ("tg", "sff-oracle", "properties"), {}),
    (f"warped:-0.3,{THIRD_PI}", "tg2d:-0.3,1", ("tg", "properties"), {}),
    (f"warped:-1,{QUARTER_PI}", "tg2d:-1,0.5", ("tg", "properties"), {}),
    ("flat:2", "flat-tg:1,0", ("tg", "harmonic", "minimal", "trajectory", "properties"), {}),
    ("flat:2", "flat-tg:0.5,0", ("trajectory",), {}),
    ("flat:2", "flat-tg:2,0", ("trajectory",), {}),
    ("flat:2", "flat-parallel", ("tg", "classify", "trajectory", "properties"), PARALLEL_FLAGS),
    ("flat:2", "flat-radial", ("classify", "properties"), RADIAL_FLAGS),
    ("flat:3", "flat-parallel", ("tg", "properties"), {}),
]


class ReportService:
    """Runs every battery entry in order and compares it with its expectation."""

    def __init__(
        self,
        samples: Optional[int] = None,
        seed: Optional[int] = None,
        tolerances: Optional[Dict[str, float]] = None,
        progress_callback: Optional[Callable] = None,
    ):
        self.samples = samples or settings.default_samples
        self.seed = settings.default_seed if seed is None else seed
        self.tolerances = tolerances or {}
        self.progress_callback = progress_callback

    def entries(self) -> List[BatteryEntry]:
        return [
            BatteryEntry(
                manifold=manifold,
                field=field,
                suite=suite,
                expected_flags=flags if suite == "classify" else {},
            )
            for manifold, field, suites, flags in BATTERY
            for suite in suites
        ]

    async def _notify(self, message: dict):
        if self.progress_callback:
            await self.progress_callback(message)

    async def run(self) -> BatteryReport:
        """
        Run the whole battery.

        Returns:
            BatteryReport; its verdict is "pass" when every entry matches its expectation
        """
        report = BatteryReport(samples=self.samples, seed=self.seed)
        entries = self.entries()
        for number, entry in enumerate(entries, start=1):
            logger.info(f"[{number}/{len(entries)}] {entry.suite} on {entry.manifold} / {entry.field}")
            await self._notify({"type": "entry_started", "index": number - 1, "suite": entry.suite})
            config = SuiteConfig(
                manifold=entry.manifold,
                field=entry.field,
                suite=entry.suite,
                samples=self.samples,
                seed=self.seed,
                tolerances=self.tolerances,
            )
            try:
                result = await SuiteService(config).run()
            except ConfigError as e:
                logger.error(f"Battery entry {entry.suite} on {entry.manifold} is misconfigured: {e}")
                entry.error = str(e)
                report.entries.append(entry)
                continue

            entry.result = result
            entry.verdict = result.verdict
            entry.matches = result.verdict == entry.expected_verdict
            if entry.expected_flags and result.classification is not None:
                observed = result.classification.flags()
                entry.flags_match = all(observed[k] == v for k, v in entry.expected_flags.items())
                entry.matches = entry.matches and entry.flags_match
                if not entry.flags_match:
                    logger.error(f"Classification of {entry.field} differs from the expected flags: {observed}")
            report.entries.append(entry)

        report.finalize()
        logger.info(f"Battery finished with verdict {report.verdict}")
        await self._notify({"type": "battery_complete", "verdict": report.verdict})
        return report
