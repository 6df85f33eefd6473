"""Tests for the built-in manifolds, fields and registry resolution."""
import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st
from numpy.testing import assert_allclose

from tgfield.models.geometry import Point, WarpedSurfaceSpec
from tgfield.services.builtin_manifolds import (
    flat_tg_field,
    gaussian_curvature_closed_form,
    hopf_ambient,
    hopf_field,
    make_sphere,
    make_warped_surface,
    radial_field,
    resolve_field,
    resolve_manifold,
    stereographic_inverse,
    stereographic_project,
    stereographic_pullback,
    stereographic_pushforward,
)
from tgfield.services.manifold_kernel import ManifoldKernel
from tgfield.utils.errors import BadConfig, UnknownRegistryKey

coordinate = st.floats(min_value=-1.5, max_value=1.5, allow_nan=False)


@given(u=st.lists(coordinate, min_size=3, max_size=3), chart=st.sampled_from(["north", "south"]))
@hyp_settings(max_examples=40, deadline=None)
def test_stereographic_inverse_lands_on_sphere(u, chart):
    x = stereographic_inverse(chart, u)
    assert sum(c * c for c in x) == pytest.approx(1.0)
    assert_allclose(stereographic_project(chart, x), u, atol=1e-12)


def test_pushforward_inverts_pullback():
    u = [0.4, -0.9, 0.3]
    V = [1.0, 0.5, -2.0]
    for chart in ("north", "south"):
        x = stereographic_inverse(chart, u)
        ambient = stereographic_pullback(chart, u, V)
        assert float(np.dot(ambient, x)) == pytest.approx(0.0, abs=1e-12)
        assert_allclose(stereographic_pushforward(chart, x, ambient), V, atol=1e-12)


def test_hopf_ambient_is_tangent_and_unit():
    x = np.array([0.5, -0.5, 0.5, 0.5])
    F = np.array(hopf_ambient(list(x)))
    assert_allclose(F, [0.5, 0.5, -0.5, 0.5])
    assert float(F @ x) == pytest.approx(0.0)
    assert float(F @ F) == pytest.approx(1.0)


@pytest.mark.parametrize("m", [1, 2])
def test_hopf_field_is_unit_in_both_charts(m):
    sphere = make_sphere(2 * m + 1)
    xi = hopf_field(m)
    for chart in ("north", "south"):
        p = Point.of(chart, np.linspace(-0.8, 0.9, 2 * m + 1))
        g = ManifoldKernel.metric_at(sphere, p)
        value = ManifoldKernel.field_jet(sphere, xi, p).value
        assert ManifoldKernel.norm(g, value) == pytest.approx(1.0, abs=1e-12)


def test_sphere_needs_dimension_two():
    with pytest.raises(BadConfig):
        make_sphere(1)


@pytest.mark.parametrize("a, alpha0", [(0.5, math.pi / 4), (-0.3, math.pi / 3), (-1.0, math.pi / 4)])
def test_warped_surface_curvature_matches_alpha_prime(a, alpha0):
    surface = make_warped_surface(a, alpha0)
    p = Point.of("uv", [0.0, 0.3])
    K = ManifoldKernel.sectional_curvature(surface, p, [1.0, 0.0], [0.0, 1.0])
    assert gaussian_curvature_closed_form(surface, 0.0) == pytest.approx(1.0 - (a + 1.0) / math.cos(alpha0), abs=1e-12)
    assert K == pytest.approx(gaussian_curvature_closed_form(surface, 0.0), abs=1e-7)


def test_warped_metric_uses_alpha_table():
    surface = make_warped_surface(0.5, math.pi / 4)
    g = ManifoldKernel.metric_at(surface, Point.of("uv", [0.0, 1.0]))
    assert_allclose(g, [[1.0, 0.0], [0.0, 0.5]], atol=1e-12)
    lower, upper = surface.table.domain
    assert lower < 0.0 < upper


def test_tg2d_field_is_unit():
    surface = make_warped_surface(-0.3, math.pi / 3)
    xi = resolve_field("tg2d:-0.3,1", surface)
    for coords in ([0.0, 0.0], [0.1, 2.0], [-0.05, -1.0]):
        p = Point.of("uv", coords)
        g = ManifoldKernel.metric_at(surface, p)
        assert ManifoldKernel.norm(g, ManifoldKernel.field_jet(surface, xi, p).value) == pytest.approx(1.0)


def test_flat_tg_field_components():
    xi = flat_tg_field(2.0, 0.0)
    value = [float(c) for c in xi.components_fn("cartesian", [math.pi / 4, 7.0])]
    assert_allclose(value, [1.0, 0.0], atol=1e-15)


def test_radial_field_sample_box_avoids_origin():
    box = radial_field(3).sample_box
    assert box.lower[0] == 0.5
    assert not box.contains([0.0, 0.0, 0.0])


def test_resolve_manifold_families():
    assert resolve_manifold("sphere:3").dim == 3
    assert resolve_manifold("flat:4").kind == "flat"
    warped = resolve_manifold("warped:0.5,0.7853981633974483")
    assert isinstance(warped, WarpedSurfaceSpec)
    assert warped.a == 0.5


@pytest.mark.parametrize(
    "manifold, field",
    [
        ("sphere:2", "hopf:1"),
        ("sphere:3", "hopf:2"),
        ("flat:2", "hopf:1"),
        ("warped:0.5,0.7853981633974483", "tg2d:0.4,0"),
        ("flat:2", "tg2d:0.5,0"),
        ("flat:3", "flat-tg:1,0"),
        ("sphere:3", "flat-radial"),
        ("sphere:2", "coord-unit:3"),
    ],
)
def test_mismatched_pairs_are_rejected(manifold, field):
    with pytest.raises(BadConfig):
        resolve_field(field, resolve_manifold(manifold))


def test_unknown_keys_are_rejected():
    with pytest.raises(UnknownRegistryKey):
        resolve_manifold("torus:2")
    with pytest.raises(UnknownRegistryKey):
        resolve_field("hopf", make_sphere(3))
