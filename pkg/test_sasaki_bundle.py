"""Tests for the Sasaki geometry of TM and of the image of a unit field."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from tgfield.models.geometry import BundlePoint, Point, TangentVector
from tgfield.services.builtin_manifolds import (
    coord_unit_field,
    hopf_field,
    make_flat,
    make_sphere,
    make_warped_surface,
    radial_field,
    tg_field_2d,
)
from tgfield.services.field_analysis import PointAnalysis
from tgfield.services.sasaki_bundle import SasakiBundle
from tgfield.utils.errors import BadConfig, NotOrthogonalToXi


@pytest.fixture(scope="module")
def s3():
    return make_sphere(3)


@pytest.fixture(scope="module")
def hopf():
    return hopf_field(1)


@pytest.fixture(scope="module")
def s2():
    return make_sphere(2)


def orthogonal_to_field(pa: PointAnalysis, raw) -> np.ndarray:
    v = np.asarray(raw, dtype=float)
    return v - pa.inner(v, pa.xi) * pa.xi


def test_lifts_are_orthonormal_pieces(s2):
    Q = BundlePoint.of(Point.of("north", [0.5, -0.4]), [0.2, 0.3])
    X, Y = np.array([1.0, 0.5]), np.array([-0.7, 0.2])
    g = 4.0 / (1.0 + 0.41) ** 2
    G = SasakiBundle.sasaki_metric_at(s2, Q)
    xh = SasakiBundle.lifts(s2, Q, X, "horizontal").as_array()
    yh = SasakiBundle.lifts(s2, Q, Y, "horizontal").as_array()
    yv = SasakiBundle.lifts(s2, Q, Y, "vertical").as_array()
    assert xh @ G @ yv == pytest.approx(0.0, abs=1e-14)
    assert xh @ G @ yh == pytest.approx(g * float(X @ Y))
    assert yv @ G @ yv == pytest.approx(g * float(Y @ Y))


def test_decompose_inverts_reassemble(s2):
    Q = BundlePoint.of(Point.of("south", [0.1, 0.9]), [-0.4, 0.6])
    parts = SasakiBundle.decompose(s2, SasakiBundle.lifts(s2, Q, [1.0, 2.0], "horizontal"))
    assert_allclose(parts.horizontal_part.as_array(), [1.0, 2.0])
    assert_allclose(parts.vertical_part.as_array(), 0.0, atol=1e-14)
    V = SasakiBundle.reassemble(s2, Q, parts)
    assert_allclose(V.as_array(), SasakiBundle.lifts(s2, Q, [1.0, 2.0], "horizontal").as_array())


def test_unknown_lift_kind(s2):
    Q = BundlePoint.of(Point.of("north", [0.0, 0.0]), [0.5, 0.0])
    with pytest.raises(BadConfig):
        SasakiBundle.lifts(s2, Q, [1.0, 0.0], "diagonal")


def test_almost_complex_structure(s3):
    Q = BundlePoint.of(Point.of("north", [0.3, 0.1, -0.2]), [0.1, 0.2, 0.3])
    J = SasakiBundle.almost_complex_structure(s3, Q)
    G = SasakiBundle.sasaki_metric_at(s3, Q)
    assert_allclose(J @ J, -np.eye(6), atol=1e-12)
    assert_allclose(J.T @ G @ J, G, atol=1e-12)


@pytest.mark.parametrize("combo", ["hh", "hv", "vh", "vv"])
def test_kowalski_formulas_match_sasaki_christoffels(s3, combo):
    Q = BundlePoint.of(Point.of("north", [0.4, -0.2, 0.6]), [0.3, -0.1, 0.05])
    X, Y = np.array([1.0, 0.3, -0.5]), np.array([0.2, -0.8, 0.4])
    closed = SasakiBundle.kowalski_derivative(s3, Q, combo, X, Y)
    brute = SasakiBundle.kowalski_brute_force(s3, Q, combo, X, Y)
    assert_allclose(closed.horizontal_part.as_array(), brute.horizontal_part.as_array(), atol=1e-9)
    assert_allclose(closed.vertical_part.as_array(), brute.vertical_part.as_array(), atol=1e-9)


def test_kowalski_on_warped_surface():
    surface = make_warped_surface(-0.3, 1.0471975511965976)
    Q = BundlePoint.of(Point.of("uv", [0.02, 0.4]), [0.6, -0.3])
    for combo in ("hh", "hv", "vh"):
        closed = SasakiBundle.kowalski_derivative(surface, Q, combo, [1.0, 0.4], [-0.5, 1.0])
        brute = SasakiBundle.kowalski_brute_force(surface, Q, combo, [1.0, 0.4], [-0.5, 1.0])
        assert_allclose(closed.vertical_part.as_array(), brute.vertical_part.as_array(), atol=1e-8)


def sff_cases():
    s2 = make_sphere(2)
    surface = make_warped_surface(0.5, 0.7853981633974483)
    return [
        (make_sphere(3), hopf_field(1), Point.of("north", [0.3, -0.5, 0.2])),
        (s2, coord_unit_field(s2, 1), Point.of("north", [0.6, 0.4])),
        (surface, tg_field_2d(surface, 0.0), Point.of("uv", [0.05, 0.9])),
        (make_flat(2), radial_field(2), Point.of("cartesian", [1.0, 0.5])),
    ]


@pytest.mark.parametrize("manifold, xi, point", sff_cases())
def test_sff_formula_matches_oracle(manifold, xi, point):
    pa = PointAnalysis(manifold, xi, point)
    tm = SasakiBundle.sasaki_manifold(manifold)
    rng = np.random.Generator(np.random.PCG64(3))
    for _ in range(3):
        X, Y, raw = rng.standard_normal((3, pa.dim))
        N = orthogonal_to_field(pa, raw)
        formula = SasakiBundle.sff_formula_at(pa, X, Y, N)
        oracle = SasakiBundle.sff_oracle_at(pa, tm, X, Y, N)
        assert formula == pytest.approx(oracle, abs=1e-5)
        assert SasakiBundle.sff_oracle_at(pa, tm, Y, X, N) == pytest.approx(oracle, abs=1e-6)


def test_normal_is_orthogonal_to_image(s3, hopf):
    pa = PointAnalysis(s3, hopf, Point.of("south", [0.7, 0.2, -0.9]))
    G = SasakiBundle.sasaki_metric_at(s3, SasakiBundle.bundle_point(pa))
    normal = SasakiBundle.normal_at(pa, orthogonal_to_field(pa, [1.0, -0.3, 0.5]))
    for X in np.eye(3):
        assert float(SasakiBundle.pushforward_at(pa, X) @ G @ normal) == pytest.approx(0.0, abs=1e-12)


def test_normal_must_be_orthogonal_to_field(s3, hopf):
    pa = PointAnalysis(s3, hopf, Point.of("north", [0.1, 0.1, 0.1]))
    with pytest.raises(NotOrthogonalToXi):
        SasakiBundle.normal_at(pa, pa.xi)
    with pytest.raises(NotOrthogonalToXi):
        SasakiBundle.sff_formula_at(pa, pa.xi, pa.xi, pa.xi)


def test_radial_image_is_minimal_but_curved():
    flat = make_flat(2)
    xi = radial_field(2)
    p = Point.of("cartesian", [0.8, -0.6])
    pa = PointAnalysis(flat, xi, p)
    N = orthogonal_to_field(pa, [0.0, 1.0])
    assert abs(SasakiBundle.sff_formula(flat, xi, p, pa.xi, N, N)) > 1e-3
    assert SasakiBundle.mean_curvature(flat, xi, p, N) == pytest.approx(0.0, abs=1e-12)


def test_bordered_shape_vanishes_for_hopf(s3, hopf):
    pa = PointAnalysis(s3, hopf, Point.of("north", [-0.5, 0.8, 0.3]))
    E = pa.frame_matrix
    for a in range(1, 3):
        for b in range(1, 3):
            for s in range(1, 3):
                assert SasakiBundle.sff_formula_at(pa, E[:, a], E[:, b], E[:, s]) == pytest.approx(0.0, abs=1e-9)


def test_pullback_metric_doubles_on_contact_distribution(s3, hopf):
    p = Point.of("north", [0.2, 0.0, -0.3])
    pa = PointAnalysis(s3, hopf, p)
    X = pa.frame_matrix[:, 1]
    assert SasakiBundle.pullback_metric(s3, hopf, p, X, X) == pytest.approx(2.0)
    assert SasakiBundle.pullback_metric(s3, hopf, p, pa.xi, pa.xi) == pytest.approx(1.0)


@pytest.mark.parametrize("scaling, expected", [("sasaki", 1.25), ("quarter", 5.0)])
def test_phi_sectional_curvature(s3, hopf, scaling, expected):
    pullback = SasakiBundle.pullback_manifold(s3, hopf, scaling)
    for coords in ([0.2, -0.3, 0.5], [1.0, 0.4, -0.2]):
        p = Point.of("north", coords)
        pa = PointAnalysis(s3, hopf, p)
        X = orthogonal_to_field(pa, [0.3, 1.0, -0.6])
        value = SasakiBundle.phi_sectional_curvature(s3, hopf, p, X, scaling, pullback=pullback)
        assert value == pytest.approx(expected, abs=1e-5)


def test_phi_curvature_needs_orthogonal_vector(s3, hopf):
    p = Point.of("north", [0.2, -0.3, 0.5])
    xi = PointAnalysis(s3, hopf, p).xi
    with pytest.raises(NotOrthogonalToXi):
        SasakiBundle.phi_sectional_curvature(s3, hopf, p, TangentVector.of(p, xi + np.array([1.0, 0.0, 0.0])))


def test_unknown_scaling(s3, hopf):
    with pytest.raises(BadConfig):
        SasakiBundle.pullback_manifold(s3, hopf, "half")
