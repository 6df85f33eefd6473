"""Immutable geometric data types."""
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import math

import numpy as np


@dataclass(frozen=True)
class CoordinateBox:
    """Per-axis open interval; infinite bounds are allowed."""

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    @classmethod
    def unbounded(cls, dim: int) -> "CoordinateBox":
        return cls((-math.inf,) * dim, (math.inf,) * dim)

    @classmethod
    def cube(cls, dim: int, half_width: float) -> "CoordinateBox":
        return cls((-half_width,) * dim, (half_width,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def contains(self, coords: Sequence[float]) -> bool:
        return all(lo < c < hi for lo, c, hi in zip(self.lower, coords, self.upper))

    def is_finite(self) -> bool:
        return all(math.isfinite(b) for b in self.lower + self.upper)


@dataclass(frozen=True)
class Chart:
    """
    A coordinate chart carrying the metric components g_ij.

    `metric_fn` maps a coordinate sequence to a dim x dim nested sequence.
    When `jet_capable` is set it must accept `Jet` coordinates as well as
    floats. Charts that cannot be evaluated on jets may supply
    `metric_first_derivatives`, returning the exact pair (g, dg) at float
    coordinates with dg[i, j, k] = d_k g_ij.
    """

    id: str
    dim: int
    domain: CoordinateBox
    metric_fn: Callable[[Sequence], Sequence[Sequence]]
    sample_box: Optional[CoordinateBox] = None
    jet_capable: bool = True
    metric_first_derivatives: Optional[Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]] = None


@dataclass(frozen=True)
class ManifoldSpec:
    """A Riemannian manifold given by one or more charts."""

    name: str
    dim: int
    charts: Tuple[Chart, ...]
    # (source chart id, target chart id) -> coordinate transition, jet-capable
    transitions: Dict[Tuple[str, str], Callable[[Sequence], List]] = field(default_factory=dict)
    kind: str = "generic"

    def chart(self, chart_id: str) -> Chart:
        for chart in self.charts:
            if chart.id == chart_id:
                return chart
        raise KeyError(f"Manifold {self.name} has no chart {chart_id!r}")

    @property
    def default_chart(self) -> Chart:
        return self.charts[0]


@dataclass(frozen=True)
class SphereSpec(ManifoldSpec):
    """Unit sphere S^n with north and south stereographic charts."""

    n: int = 2

    @property
    def ambient_dim(self) -> int:
        return self.n + 1


@dataclass(frozen=True)
class WarpedSurfaceSpec(ManifoldSpec):
    """du^2 + sin^2(alpha(u)) dv^2 with alpha tabulated from its ODE."""

    a: float = 0.0
    alpha0: float = 0.0
    table: Optional["AlphaTable"] = None


@dataclass(frozen=True)
class Point:
    chart: str
    coords: Tuple[float, ...]

    @classmethod
    def of(cls, chart: str, coords: Sequence[float]) -> "Point":
        return cls(chart, tuple(float(c) for c in coords))

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=float)


@dataclass(frozen=True)
class TangentVector:
    at: Point
    components: Tuple[float, ...]

    @classmethod
    def of(cls, at: Point, components: Sequence[float]) -> "TangentVector":
        if len(components) != len(at.coords):
            raise ValueError(
                f"Vector has {len(components)} components but chart dimension is {len(at.coords)}"
            )
        return cls(at, tuple(float(c) for c in components))

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=float)


@dataclass(frozen=True)
class MetricJet:
    """g_ij with first and second coordinate derivatives at a point."""

    at: Point
    g: np.ndarray
    dg: np.ndarray  # dg[i, j, k] = d_k g_ij
    d2g: Optional[np.ndarray] = None  # d2g[i, j, k, m] = d_m d_k g_ij
    method: str = "jet"


@dataclass(frozen=True)
class Connection:
    """Levi-Civita connection data at a point, with optional first derivatives."""

    at: Point
    g: np.ndarray
    ginv: np.ndarray
    dg: np.ndarray
    gamma: np.ndarray  # gamma[i, j, k] = Gamma^i_{jk}
    dgamma: Optional[np.ndarray] = None  # dgamma[i, j, k, m] = d_m Gamma^i_{jk}


@dataclass(frozen=True)
class ChristoffelSample:
    at: Point
    gamma: np.ndarray  # gamma[i, j, k] = Gamma^i_{jk}


@dataclass(frozen=True)
class Frame:
    at: Point
    vectors: Tuple[TangentVector, ...]

    @classmethod
    def from_matrix(cls, at: Point, matrix: np.ndarray) -> "Frame":
        return cls(at, tuple(TangentVector.of(at, matrix[:, i]) for i in range(matrix.shape[1])))

    @property
    def matrix(self) -> np.ndarray:
        """Columns are the frame vectors in coordinate components."""
        return np.column_stack([v.as_array() for v in self.vectors])


@dataclass(frozen=True)
class FieldSpec:
    """
    A smooth vector field given chart-wise.

    `components_fn(chart_id, coords)` returns the components in that
    chart's coordinate basis and must accept `Jet` coordinates.
    """

    name: str
    components_fn: Callable[[str, Sequence], Sequence]
    unit: bool = True
    sample_box: Optional[CoordinateBox] = None
    ambient_fn: Optional[Callable[[Sequence], List]] = None


@dataclass(frozen=True)
class FieldJet:
    """Field components with first and second coordinate derivatives."""

    at: Point
    value: np.ndarray  # V^i
    grad: np.ndarray  # grad[i, k] = d_k V^i
    hess: np.ndarray  # hess[i, k, m] = d_m d_k V^i


@dataclass(frozen=True)
class ShapeOperatorSample:
    at: Point
    matrix_A: np.ndarray
    matrix_At: np.ndarray
    frame: Frame


@dataclass(frozen=True)
class GeodesicCurvatureSample:
    at: Point
    k: float
    nu: Optional[TangentVector]

    @property
    def geodesic(self) -> bool:
        return self.nu is None


@dataclass(frozen=True)
class BundlePoint:
    """Q = (q, xi) in natural coordinates of TM."""

    base: Point
    fiber: Tuple[float, ...]

    @classmethod
    def of(cls, base: Point, fiber: Sequence[float]) -> "BundlePoint":
        return cls(base, tuple(float(c) for c in fiber))

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.base.as_array(), np.array(self.fiber, dtype=float)])

    def as_point(self, chart_id: str) -> Point:
        return Point.of(chart_id, self.as_array())


@dataclass(frozen=True)
class BundleVector:
    """Components along (d/du^i, d/dxi^i)."""

    at: BundlePoint
    components: Tuple[float, ...]

    @classmethod
    def of(cls, at: BundlePoint, components: Sequence[float]) -> "BundleVector":
        return cls(at, tuple(float(c) for c in components))

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=float)


@dataclass(frozen=True)
class LiftDecomposition:
    horizontal_part: TangentVector  # pi_* X~
    vertical_part: TangentVector  # K X~


@dataclass(frozen=True)
class AlphaTable:
    """Dense RK4 solution of the warped-surface ODE with a quintic Hermite interpolant."""

    a: float
    alpha0: float
    step: float
    nodes: np.ndarray  # rows (u, alpha, alpha', alpha'')
    interpolant: object  # scipy.interpolate.BPoly

    @property
    def domain(self) -> Tuple[float, float]:
        return float(self.nodes[0, 0]), float(self.nodes[-1, 0])

    def evaluate(self, u: float) -> Tuple[float, float, float]:
        """Interpolated alpha, alpha' and alpha'' at u."""
        bp = self.interpolant
        return float(bp(u)), float(bp(u, 1)), float(bp(u, 2))

    def jet(self, u):
        """alpha(u) for a float or Jet argument."""
        from tgfield.utils.jets import Jet

        if isinstance(u, Jet):
            return u.compose(*self.evaluate(u.value))
        return self.evaluate(float(u))[0]


@dataclass(frozen=True)
class Trajectory:
    """Integral curve samples parameterized by arc length."""

    chart: str
    times: np.ndarray
    coords: np.ndarray  # shape (len(times), dim)
    truncated: bool = False
    reason: Optional[str] = None

    @property
    def samples(self) -> List[Point]:
        return [Point.of(self.chart, row) for row in self.coords]


@dataclass(frozen=True)
class QuadratureGrid:
    """Tensor-product Gauss-Legendre grid over a finite chart box."""

    chart: str
    box: CoordinateBox
    nodes_per_axis: int
