"""Built-in manifolds, unit vector fields and the registry that resolves CLI keys."""
from typing import List, Optional, Sequence
import logging
import math

from tgfield.config import settings
from tgfield.models.geometry import (
    Chart,
    CoordinateBox,
    FieldSpec,
    ManifoldSpec,
    SphereSpec,
    WarpedSurfaceSpec,
)
from tgfield.services.ode_service import OdeService
from tgfield.utils import jets
from tgfield.utils.errors import BadConfig
from tgfield.utils.registry_parser import RegistryParser

logger = logging.getLogger(__name__)


# Stereographic charts. "north" projects from (0, ..., 0, 1), "south" from (0, ..., 0, -1).


def _squared_norm(u: Sequence):
    return sum((c * c for c in u), 0.0)


def stereographic_inverse(chart_id: str, u: Sequence) -> List:
    """Ambient point x in R^{n+1} for chart coordinates u."""
    s = _squared_norm(u)
    scale = 2.0 / (1.0 + s)
    last = (s - 1.0) / (s + 1.0) if chart_id == "north" else (1.0 - s) / (1.0 + s)
    return [scale * c for c in u] + [last]


def stereographic_project(chart_id: str, x: Sequence) -> List:
    """Chart coordinates of an ambient unit vector x."""
    denominator = 1.0 - x[-1] if chart_id == "north" else 1.0 + x[-1]
    return [c / denominator for c in x[:-1]]


def stereographic_pushforward(chart_id: str, x: Sequence, F: Sequence) -> List:
    """Chart components of an ambient tangent vector F at x."""
    if chart_id == "north":
        d = 1.0 - x[-1]
        return [F[i] / d + x[i] * F[-1] / (d * d) for i in range(len(x) - 1)]
    d = 1.0 + x[-1]
    return [F[i] / d - x[i] * F[-1] / (d * d) for i in range(len(x) - 1)]


def stereographic_pullback(chart_id: str, u: Sequence, V: Sequence) -> List:
    """Ambient vector of chart components V at chart point u (differential of the inverse)."""
    s = _squared_norm(u)
    q = 1.0 + s
    uv = sum(a * b for a, b in zip(u, V))
    ambient = [2.0 * v / q - 4.0 * c * uv / (q * q) for c, v in zip(u, V)]
    last = 4.0 * uv / (q * q)
    return ambient + [last if chart_id == "north" else -last]


def _inversion(u: Sequence) -> List:
    s = _squared_norm(u)
    return [c / s for c in u]


def _round_metric(u: Sequence) -> List[List]:
    factor = 4.0 / (1.0 + _squared_norm(u)) ** 2
    n = len(u)
    return [[factor if i == j else 0.0 for j in range(n)] for i in range(n)]


def make_sphere(n: int) -> SphereSpec:
    """
    Unit sphere S^n with a two-chart stereographic atlas.

    Args:
        n: Dimension, at least 2

    Returns:
        SphereSpec with charts "north" and "south" and both transitions
    """
    if n < 2:
        raise BadConfig(f"sphere dimension must be at least 2, got {n}")
    sample_box = CoordinateBox.cube(n, settings.sample_half_width)
    charts = tuple(
        Chart(
            id=chart_id,
            dim=n,
            domain=CoordinateBox.unbounded(n),
            metric_fn=_round_metric,
            sample_box=sample_box,
        )
        for chart_id in ("north", "south")
    )
    return SphereSpec(
        name=f"sphere:{n}",
        dim=n,
        charts=charts,
        transitions={("north", "south"): _inversion, ("south", "north"): _inversion},
        kind="sphere",
        n=n,
    )


def make_flat(n: int) -> ManifoldSpec:
    """Euclidean R^n in Cartesian coordinates."""
    if n < 1:
        raise BadConfig(f"flat dimension must be positive, got {n}")
    identity = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    chart = Chart(
        id="cartesian",
        dim=n,
        domain=CoordinateBox.unbounded(n),
        metric_fn=lambda _u: identity,
        sample_box=CoordinateBox.cube(n, settings.sample_half_width),
    )
    return ManifoldSpec(name=f"flat:{n}", dim=n, charts=(chart,), kind="flat")


def make_warped_surface(a: float, alpha0: float, h: Optional[float] = None) -> WarpedSurfaceSpec:
    """
    Surface du^2 + sin^2(alpha(u)) dv^2 with alpha' = 1 - (a + 1)/cos(alpha).

    Args:
        a: ODE parameter
        alpha0: alpha(0)
        h: RK4 step for the alpha table

    Returns:
        WarpedSurfaceSpec with chart "uv" restricted to the tabulated u-interval
    """
    table = OdeService.integrate_alpha(a, alpha0, h=h)
    u_min, u_max = table.domain
    inset = 5 * table.step

    def metric(coords: Sequence) -> List[List]:
        s = jets.sin(table.jet(coords[0]))
        return [[1.0, 0.0], [0.0, s * s]]

    chart = Chart(
        id="uv",
        dim=2,
        domain=CoordinateBox((u_min, -math.inf), (u_max, math.inf)),
        metric_fn=metric,
        sample_box=CoordinateBox((u_min + inset, -math.pi), (u_max - inset, math.pi)),
    )
    return WarpedSurfaceSpec(
        name=f"warped:{a:g},{alpha0:g}",
        dim=2,
        charts=(chart,),
        kind="warped",
        a=a,
        alpha0=alpha0,
        table=table,
    )


def gaussian_curvature_closed_form(surface: WarpedSurfaceSpec, u: float) -> float:
    """Gauss curvature -(sin alpha)''/sin alpha, which the ODE reduces to alpha'(u)."""
    return surface.table.evaluate(u)[1]


# Fields


def ambient_sphere_field(name: str, ambient_fn) -> FieldSpec:
    """Field on a sphere defined by an ambient map and pushed into either chart."""

    def components(chart_id: str, u: Sequence) -> List:
        x = stereographic_inverse(chart_id, u)
        return stereographic_pushforward(chart_id, x, ambient_fn(x))

    return FieldSpec(name=name, components_fn=components, unit=True, ambient_fn=ambient_fn)


def hopf_ambient(x: Sequence) -> List:
    """(x1, x2, x3, x4, ...) -> (-x2, x1, -x4, x3, ...)."""
    out = []
    for k in range(0, len(x), 2):
        out += [-x[k + 1], x[k]]
    return out


def hopf_field(m: int) -> FieldSpec:
    """Hopf field on S^{2m+1}."""
    if m < 1:
        raise BadConfig(f"hopf parameter must be at least 1, got {m}")
    return ambient_sphere_field(f"hopf:{m}", hopf_ambient)


def tg_field_2d(surface: WarpedSurfaceSpec, omega0: float) -> FieldSpec:
    """xi = cos(a v + omega0) d_u + sin(a v + omega0)/sin(alpha(u)) d_v."""
    a = surface.a

    def components(_chart_id: str, coords: Sequence) -> List:
        u, v = coords
        phase = a * v + omega0
        return [jets.cos(phase), jets.sin(phase) / jets.sin(surface.table.jet(u))]

    return FieldSpec(name=f"tg2d:{a:g},{omega0:g}", components_fn=components, unit=True)


def flat_tg_field(a: float, omega0: float) -> FieldSpec:
    """xi(x, y) = (sin(a x + omega0), -cos(a x + omega0)) on the plane."""

    def components(_chart_id: str, coords: Sequence) -> List:
        phase = a * coords[0] + omega0
        return [jets.sin(phase), -jets.cos(phase)]

    return FieldSpec(name=f"flat-tg:{a:g},{omega0:g}", components_fn=components, unit=True)


def parallel_field(n: int) -> FieldSpec:
    """Constant field d_1 on R^n."""
    value = [1.0] + [0.0] * (n - 1)
    return FieldSpec(name="flat-parallel", components_fn=lambda _c, _u: value, unit=True)


def radial_field(n: int) -> FieldSpec:
    """x/|x| on R^n minus the origin; sampled in a box with x1 > 0.5."""

    def components(_chart_id: str, coords: Sequence) -> List:
        r = jets.sqrt(_squared_norm(coords))
        return [c / r for c in coords]

    w = settings.sample_half_width
    box = CoordinateBox((0.5,) + (-w,) * (n - 1), (w,) * n)
    return FieldSpec(name="flat-radial", components_fn=components, unit=True, sample_box=box)


def coord_unit_field(manifold: ManifoldSpec, index: int) -> FieldSpec:
    """Normalized coordinate field d_i / |d_i|_g in every chart (1-based index)."""
    if not 1 <= index <= manifold.dim:
        raise BadConfig(f"coord-unit index must lie in 1..{manifold.dim}, got {index}")
    i = index - 1

    def components(chart_id: str, coords: Sequence) -> List:
        g = manifold.chart(chart_id).metric_fn(coords)
        out: List = [0.0] * manifold.dim
        out[i] = 1.0 / jets.sqrt(g[i][i])
        return out

    return FieldSpec(name=f"coord-unit:{index}", components_fn=components, unit=True)


# Registry


def resolve_manifold(key: str) -> ManifoldSpec:
    """
    Build the manifold named by a registry key.

    Args:
        key: "sphere:n", "flat:n" or "warped:a,alpha0"

    Returns:
        ManifoldSpec
    """
    parsed = RegistryParser.parse_manifold(key)
    if parsed.family == "sphere":
        return make_sphere(parsed.int_param(0))
    if parsed.family == "flat":
        return make_flat(parsed.int_param(0))
    return make_warped_surface(*parsed.params)


def resolve_field(key: str, manifold: ManifoldSpec) -> FieldSpec:
    """
    Build the field named by a registry key on a given manifold.

    Args:
        key: Field key, e.g. "hopf:1"
        manifold: Manifold the field must live on

    Returns:
        FieldSpec
    """
    parsed = RegistryParser.parse_field(key)
    family = parsed.family

    if family == "hopf":
        m = parsed.int_param(0)
        if not isinstance(manifold, SphereSpec) or manifold.n != 2 * m + 1:
            raise BadConfig(f"{key} lives on sphere:{2 * m + 1}, not {manifold.name}")
        return hopf_field(m)

    if family == "tg2d":
        a, omega0 = parsed.params
        if not isinstance(manifold, WarpedSurfaceSpec):
            raise BadConfig(f"{key} needs a warped surface, got {manifold.name}")
        if abs(manifold.a - a) > 1e-12:
            raise BadConfig(f"{key} has a={a:g} but the surface has a={manifold.a:g}")
        return tg_field_2d(manifold, omega0)

    if family == "coord-unit":
        return coord_unit_field(manifold, parsed.int_param(0))

    if manifold.kind != "flat":
        raise BadConfig(f"{key} lives on flat space, not {manifold.name}")
    if family == "flat-tg":
        if manifold.dim != 2:
            raise BadConfig(f"{key} lives on flat:2, not {manifold.name}")
        return flat_tg_field(*parsed.params)
    if family == "flat-parallel":
        return parallel_field(manifold.dim)
    return radial_field(manifold.dim)
