"""Services package."""
from .manifold_kernel import ManifoldKernel
from .ode_service import OdeService
from .field_analysis import FieldAnalysis, PointAnalysis
from .sasaki_bundle import SasakiBundle
from .suite_service import SuiteService, run_suite
from .report_service import ReportService

__all__ = [
    "ManifoldKernel",
    "OdeService",
    "FieldAnalysis",
    "PointAnalysis",
    "SasakiBundle",
    "SuiteService",
    "run_suite",
    "ReportService",
]
