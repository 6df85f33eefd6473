"""Models package."""
from .geometry import (
    AlphaTable,
    BundlePoint,
    BundleVector,
    Chart,
    ChristoffelSample,
    Connection,
    CoordinateBox,
    FieldJet,
    FieldSpec,
    Frame,
    GeodesicCurvatureSample,
    LiftDecomposition,
    ManifoldSpec,
    MetricJet,
    Point,
    QuadratureGrid,
    ShapeOperatorSample,
    SphereSpec,
    TangentVector,
    Trajectory,
    WarpedSurfaceSpec,
)
from .reports import (
    BatteryEntry,
    BatteryReport,
    ClassificationRecord,
    FlagResult,
    ResidualReport,
    SuiteConfig,
    SuiteResult,
)

__all__ = [
    "AlphaTable",
    "BundlePoint",
    "BundleVector",
    "Chart",
    "ChristoffelSample",
    "Connection",
    "CoordinateBox",
    "FieldJet",
    "FieldSpec",
    "Frame",
    "GeodesicCurvatureSample",
    "LiftDecomposition",
    "ManifoldSpec",
    "MetricJet",
    "Point",
    "QuadratureGrid",
    "ShapeOperatorSample",
    "SphereSpec",
    "TangentVector",
    "Trajectory",
    "WarpedSurfaceSpec",
    "BatteryEntry",
    "BatteryReport",
    "ClassificationRecord",
    "FlagResult",
    "ResidualReport",
    "SuiteConfig",
    "SuiteResult",
]
