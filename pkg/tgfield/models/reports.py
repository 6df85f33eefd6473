"""Serializable report and configuration models."""
from typing import Dict, List, Literal, Optional, Sequence
import math

from pydantic import BaseModel, Field, field_validator

from tgfield.config import settings

SuiteName = Literal[
    "tg",
    "harmonic",
    "minimal",
    "classify",
    "sff-oracle",
    "phi-curvature",
    "trajectory",
    "properties",
]


class ResidualReport(BaseModel):
    """One named residual evaluated over a set of sample points."""

    name: str
    max_defect: Optional[float]
    tolerance: float
    passed: bool
    chart: Optional[str] = None
    points: List[List[float]] = []
    defects: List[Optional[float]] = []
    worst_point: Optional[List[float]] = None
    directions: List[List[float]] = []
    note: Optional[str] = None

    @classmethod
    def from_defects(
        cls,
        name: str,
        defects: Sequence[float],
        tolerance: float,
        points: Optional[Sequence[Sequence[float]]] = None,
        directions: Optional[Sequence[Sequence[float]]] = None,
        chart: Optional[str] = None,
        note: Optional[str] = None,
    ) -> "ResidualReport":
        """
        Build a report from per-sample defects.

        Args:
            name: Residual name (e.g. "MainEq")
            defects: One defect per sample; NaN or inf marks a failed evaluation
            tolerance: Pass threshold (strict)
            points: Sample coordinates, same order as defects
            directions: Direction arguments at the worst sample
            chart: Chart id of the points
            note: Free-form remark

        Returns:
            ResidualReport with passed = (max defect < tolerance)
        """
        clean = [float(d) for d in defects]
        finite = all(math.isfinite(d) for d in clean)
        if clean and finite:
            worst = max(range(len(clean)), key=lambda i: clean[i])
            max_defect = clean[worst]
        else:
            worst = next((i for i, d in enumerate(clean) if not math.isfinite(d)), None)
            max_defect = None
        points = [list(map(float, p)) for p in (points or [])]
        return cls(
            name=name,
            max_defect=max_defect,
            tolerance=tolerance,
            passed=bool(clean) and finite and max_defect < tolerance,
            chart=chart,
            points=points,
            defects=[d if math.isfinite(d) else None for d in clean],
            worst_point=points[worst] if points and worst is not None else None,
            directions=[list(map(float, d)) for d in (directions or [])],
            note=note,
        )


class FlagResult(BaseModel):
    holds: bool
    max_defect: Optional[float]
    tolerance: float


class ClassificationRecord(BaseModel):
    """Membership of a field in the classes of unit vector fields."""

    geodesic: FlagResult
    holonomic: FlagResult
    killing: FlagResult
    covariantly_normal: FlagResult
    strongly_normal: FlagResult
    invariant: FlagResult
    chart: Optional[str] = None
    sample_points: List[List[float]] = []
    notes: List[str] = []

    def flags(self) -> Dict[str, bool]:
        return {
            name: getattr(self, name).holds
            for name in (
                "geodesic",
                "holonomic",
                "killing",
                "covariantly_normal",
                "strongly_normal",
                "invariant",
            )
        }


class SuiteConfig(BaseModel):
    """Configuration of one verification suite run."""

    manifold: str
    field: str
    suite: SuiteName
    samples: int = Field(default_factory=lambda: settings.default_samples, ge=1)
    seed: int = Field(default_factory=lambda: settings.default_seed)
    tolerances: Dict[str, float] = {}
    output: Optional[str] = None
    format: Literal["json", "csv"] = "json"
    length: Optional[float] = None
    starts: Optional[int] = Field(default=None, ge=1)

    @field_validator("tolerances")
    @classmethod
    def positive_tolerances(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, tol in value.items():
            if not tol > 0:
                raise ValueError(f"Tolerance for {name} must be positive, got {tol}")
        return value

    def tolerance(self, name: str, default: float) -> float:
        return self.tolerances.get(name, default)


class SuiteResult(BaseModel):
    """Outcome of a suite: every check with its tolerance and verdict."""

    schema_version: str = Field(default_factory=lambda: settings.schema_version)
    config: SuiteConfig
    rng: str = "numpy.random.PCG64"
    checks: List[ResidualReport] = []
    classification: Optional[ClassificationRecord] = None
    outputs: List[str] = []
    verdict: Literal["pass", "fail"] = "fail"
    wall_time_s: float = Field(default=0.0, exclude=True)

    def finalize(self) -> "SuiteResult":
        self.verdict = "pass" if self.checks and all(c.passed for c in self.checks) else "fail"
        return self


class BatteryEntry(BaseModel):
    """One suite run of the report battery with the verdict it is expected to reach."""

    manifold: str
    field: str
    suite: SuiteName
    expected_verdict: Literal["pass", "fail"] = "pass"
    expected_flags: Dict[str, bool] = {}
    verdict: Optional[Literal["pass", "fail"]] = None
    flags_match: Optional[bool] = None
    matches: bool = False
    result: Optional[SuiteResult] = None
    error: Optional[str] = None


class BatteryReport(BaseModel):
    """Combined output of `tgfield report`."""

    schema_version: str = Field(default_factory=lambda: settings.schema_version)
    rng: str = "numpy.random.PCG64"
    samples: int
    seed: int
    entries: List[BatteryEntry] = []
    verdict: Literal["pass", "fail"] = "fail"

    def finalize(self) -> "BatteryReport":
        self.verdict = "pass" if self.entries and all(e.matches for e in self.entries) else "fail"
        return self
