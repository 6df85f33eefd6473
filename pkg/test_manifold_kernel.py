"""Tests for the chart-based Riemannian kernel."""
import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from numpy.testing import assert_allclose

from tgfield.models.geometry import Chart, CoordinateBox, FieldSpec, ManifoldSpec, Point, TangentVector
from tgfield.services.builtin_manifolds import coord_unit_field, hopf_field, make_flat, make_sphere
from tgfield.services.manifold_kernel import ManifoldKernel
from tgfield.utils import jets
from tgfield.utils.errors import DegeneratePlane, DegenerateSeed, NonUnitField, PointOutsideDomain, SingularMetric

coordinate = st.floats(min_value=-1.4, max_value=1.4, allow_nan=False)


@pytest.fixture(scope="module")
def s2():
    return make_sphere(2)


@pytest.fixture(scope="module")
def s3():
    return make_sphere(3)


def polar_plane() -> ManifoldSpec:
    """dr^2 + r^2 dθ^2 on r > 0."""
    chart = Chart(
        id="polar",
        dim=2,
        domain=CoordinateBox((0.0, -np.inf), (np.inf, np.inf)),
        metric_fn=lambda u: [[1.0, 0.0], [0.0, u[0] * u[0]]],
    )
    return ManifoldSpec(name="polar", dim=2, charts=(chart,))


def test_flat_metric_is_identity():
    flat = make_flat(2)
    g = ManifoldKernel.metric_at(flat, Point.of("cartesian", [0.3, -1.2]))
    assert_allclose(g, np.eye(2))
    gamma = ManifoldKernel.christoffel_at(flat, Point.of("cartesian", [0.3, -1.2])).gamma
    assert_allclose(gamma, 0.0)


def test_polar_christoffel_symbols():
    polar = polar_plane()
    gamma = ManifoldKernel.christoffel_at(polar, Point.of("polar", [2.0, 0.4])).gamma
    assert gamma[0, 1, 1] == pytest.approx(-2.0)
    assert gamma[1, 0, 1] == pytest.approx(0.5)
    assert gamma[1, 1, 0] == pytest.approx(0.5)
    assert gamma[0, 0, 0] == pytest.approx(0.0)


def test_polar_plane_is_flat():
    R = ManifoldKernel.riemann_tensor(polar_plane(), Point.of("polar", [1.3, 0.2]))
    assert_allclose(R, 0.0, atol=1e-12)


def test_sphere_metric_at_origin(s2):
    g = ManifoldKernel.metric_at(s2, Point.of("north", [0.0, 0.0]))
    assert_allclose(g, 4.0 * np.eye(2))


@given(u=coordinate, v=coordinate)
@hyp_settings(max_examples=25, deadline=None)
def test_sphere_curvature_operator(u, v):
    s2 = make_sphere(2)
    p = Point.of("north", [u, v])
    g = ManifoldKernel.metric_at(s2, p)
    X, Y, Z = np.array([1.0, 0.3]), np.array([-0.2, 0.8]), np.array([0.5, 0.5])
    RXY_Z = ManifoldKernel.riemann_at(s2, p, X, Y, Z).as_array()
    expected = (Y @ g @ Z) * X - (X @ g @ Z) * Y
    assert_allclose(RXY_Z, expected, atol=1e-9 * max(1.0, np.max(np.abs(expected))))


def test_sphere_sectional_curvature_is_one(s3):
    p = Point.of("north", [0.4, -0.3, 0.9])
    K = ManifoldKernel.sectional_curvature(s3, p, [1.0, 0.2, 0.0], [0.0, 1.0, -0.5])
    assert K == pytest.approx(1.0, abs=1e-9)


def test_jet_and_finite_difference_christoffels_agree(s3):
    p = Point.of("north", [0.7, 0.1, -0.4])
    jet = ManifoldKernel.christoffel_at(s3, p, method="jet").gamma
    fd = ManifoldKernel.christoffel_at(s3, p, method="fd").gamma
    assert_allclose(jet, fd, atol=1e-5)


def test_fd_riemann_close_to_jet(s2):
    p = Point.of("north", [0.5, -0.2])
    jet = ManifoldKernel.riemann_tensor(s2, p, method="jet")
    fd = ManifoldKernel.riemann_tensor(s2, p, method="fd")
    assert_allclose(jet, fd, atol=1e-4)


def test_torsion_free(s3):
    gamma = ManifoldKernel.christoffel_at(s3, Point.of("north", [0.2, 0.3, -1.1])).gamma
    assert_allclose(gamma, gamma.transpose(0, 2, 1), atol=1e-14)


def test_first_bianchi_identity(s3):
    R = ManifoldKernel.riemann_tensor(s3, Point.of("south", [0.1, -0.8, 0.6]))
    cyclic = R + np.einsum("ijkl->iklj", R) + np.einsum("ijkl->iljk", R)
    assert_allclose(cyclic, 0.0, atol=1e-9)


def test_metric_compatibility_of_covariant_derivative(s3):
    hopf = hopf_field(1)
    p = Point.of("north", [0.3, -0.5, 0.2])
    X = TangentVector.of(p, [0.4, 1.0, -0.3])
    g = ManifoldKernel.metric_at(s3, p)
    xi = ManifoldKernel.field_jet(s3, hopf, p).value
    nabla = ManifoldKernel.covariant_derivative(s3, hopf, X).as_array()
    # |xi| = 1 so nabla_X xi is orthogonal to xi
    assert xi @ g @ nabla == pytest.approx(0.0, abs=1e-12)


def test_lie_bracket_is_antisymmetric(s3):
    hopf = hopf_field(1)
    other = coord_unit_field(s3, 2)
    p = Point.of("north", [0.3, -0.5, 0.2])
    vw = ManifoldKernel.lie_bracket(s3, hopf, other, p).as_array()
    wv = ManifoldKernel.lie_bracket(s3, other, hopf, p).as_array()
    assert_allclose(vw, -wv, atol=1e-14)


def polynomial_fields():
    """Two non-unit, non-constant fields on a 3-dimensional chart."""
    V = FieldSpec(
        name="poly-v",
        components_fn=lambda _c, u: [u[0] * u[1], 1.0 + u[2], jets.sin(u[0])],
        unit=False,
    )
    W = FieldSpec(
        name="poly-w",
        components_fn=lambda _c, u: [u[2], u[0] * u[0], 0.5 - u[1]],
        unit=False,
    )
    return V, W


def test_leibniz_rule_for_general_fields(s3):
    V, W = polynomial_fields()
    p = Point.of("north", [0.4, -0.7, 0.3])
    X = np.array([0.9, -0.2, 0.5])
    coords = jets.seed(p.coords)
    v, w = V.components_fn("north", coords), W.components_fn("north", coords)
    g = s3.chart("north").metric_fn(coords)
    product = sum(v[i] * g[i][j] * w[j] for i in range(3) for j in range(3))
    lhs = float(product.grad @ X)

    g0 = ManifoldKernel.metric_at(s3, p)
    v0, w0 = jets.values(v), jets.values(w)
    nabla_v = ManifoldKernel.covariant_derivative(s3, V, TangentVector.of(p, X)).as_array()
    nabla_w = ManifoldKernel.covariant_derivative(s3, W, TangentVector.of(p, X)).as_array()
    assert lhs == pytest.approx(nabla_v @ g0 @ w0 + v0 @ g0 @ nabla_w, abs=1e-8)


@pytest.mark.parametrize("which", ["constant", "polynomial"])
def test_lie_bracket_is_difference_of_covariant_derivatives(s3, which):
    hopf = hopf_field(1)
    if which == "constant":
        other = FieldSpec(name="d1", components_fn=lambda _c, _u: [1.0, 0.0, 0.0], unit=False)
    else:
        other = polynomial_fields()[1]
    p = Point.of("north", [0.3, -0.5, 0.2])
    v = ManifoldKernel.field_jet(s3, hopf, p).value
    w = ManifoldKernel.field_jet(s3, other, p, check_unit=False).value
    nabla_v_w = ManifoldKernel.covariant_derivative(s3, other, TangentVector.of(p, v)).as_array()
    nabla_w_v = ManifoldKernel.covariant_derivative(s3, hopf, TangentVector.of(p, w)).as_array()
    bracket = ManifoldKernel.lie_bracket(s3, hopf, other, p).as_array()
    assert_allclose(bracket, nabla_v_w - nabla_w_v, atol=1e-10)


def test_orthonormal_frame(s3):
    p = Point.of("north", [1.0, 0.5, -0.5])
    g = ManifoldKernel.metric_at(s3, p)
    frame = ManifoldKernel.orthonormal_frame(g, p, list(np.eye(3)))
    E = frame.matrix
    assert_allclose(E.T @ g @ E, np.eye(3), atol=1e-12)


def test_adapted_frame_leads_with_field(s3):
    hopf = hopf_field(1)
    p = Point.of("north", [0.2, -0.1, 0.4])
    E = ManifoldKernel.adapted_frame(s3, hopf, p).matrix
    xi = ManifoldKernel.field_jet(s3, hopf, p).value
    g = ManifoldKernel.metric_at(s3, p)
    assert_allclose(E[:, 0], xi, atol=1e-14)
    assert_allclose(E.T @ g @ E, np.eye(3), atol=1e-12)


def test_degenerate_seed_raises(s2):
    p = Point.of("north", [0.0, 0.0])
    g = ManifoldKernel.metric_at(s2, p)
    with pytest.raises(DegenerateSeed):
        ManifoldKernel.orthonormal_frame(g, p, [[1.0, 0.0], [2.0, 0.0]])


def test_degenerate_plane_raises(s2):
    with pytest.raises(DegeneratePlane):
        ManifoldKernel.sectional_curvature(s2, Point.of("north", [0.1, 0.1]), [1.0, 1.0], [2.0, 2.0])


def test_point_outside_domain():
    with pytest.raises(PointOutsideDomain):
        ManifoldKernel.metric_at(polar_plane(), Point.of("polar", [-1.0, 0.0]))
    with pytest.raises(PointOutsideDomain):
        ManifoldKernel.metric_at(polar_plane(), Point.of("missing", [1.0, 0.0]))


def test_singular_metric_raises():
    chart = Chart(
        id="c",
        dim=2,
        domain=CoordinateBox.unbounded(2),
        metric_fn=lambda u: [[1.0, 0.0], [0.0, 0.0]],
    )
    degenerate = ManifoldSpec(name="degenerate", dim=2, charts=(chart,))
    with pytest.raises(SingularMetric):
        ManifoldKernel.metric_at(degenerate, Point.of("c", [0.0, 0.0]))


def test_non_unit_field_rejected(s2):
    doubled = FieldSpec(name="doubled", components_fn=lambda _c, _u: [1.0, 0.0])
    with pytest.raises(NonUnitField):
        ManifoldKernel.field_jet(s2, doubled, Point.of("north", [0.0, 0.0]))


def test_chart_transition_preserves_lengths(s3):
    p = Point.of("north", [0.6, -0.2, 0.3])
    X = TangentVector.of(p, [0.3, 1.0, -0.7])
    q = ManifoldKernel.transition_point(s3, p, "south")
    Xq = ManifoldKernel.transition_vector(s3, X, "south")
    scale = 1.0 / float(np.dot(p.coords, p.coords))
    assert_allclose(q.coords, np.array(p.coords) * scale)
    g_p = ManifoldKernel.metric_at(s3, p)
    g_q = ManifoldKernel.metric_at(s3, q)
    assert ManifoldKernel.norm(g_q, Xq) == pytest.approx(ManifoldKernel.norm(g_p, X), rel=1e-12)


def test_transition_from_the_antipodal_pole(s2):
    pole = Point.of("north", [0.0, 0.0])
    with pytest.raises(PointOutsideDomain):
        ManifoldKernel.transition_point(s2, pole, "south")
    with pytest.raises(PointOutsideDomain):
        ManifoldKernel.transition_vector(s2, TangentVector.of(pole, [1.0, 0.0]), "south")


def test_provider_chart_matches_jets(s2):
    """A chart with an exact first-derivative provider reproduces the jet connection."""
    base = s2.chart("north")

    def provider(x):
        g, dg, _ = jets.unpack_matrix(base.metric_fn(jets.seed(x)), 2)
        return g, dg

    chart = Chart(
        id="north",
        dim=2,
        domain=base.domain,
        metric_fn=lambda u: base.metric_fn(list(u)),
        jet_capable=False,
        metric_first_derivatives=provider,
    )
    copy = ManifoldSpec(name="copy", dim=2, charts=(chart,))
    p = Point.of("north", [0.4, -0.6])
    exact = ManifoldKernel.connection(s2, p)
    provided = ManifoldKernel.connection(copy, p)
    assert_allclose(provided.gamma, exact.gamma, atol=1e-14)
    assert_allclose(provided.dgamma, exact.dgamma, atol=1e-6)
