"""Tests for the RK4 integrators, the alpha table and integral curves."""
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings as hyp_settings, strategies as st
from numpy.testing import assert_allclose

from tgfield.models.geometry import Point
from tgfield.services.builtin_manifolds import flat_tg_field, make_flat, make_warped_surface, tg_field_2d
from tgfield.services.ode_service import OdeService
from tgfield.utils.errors import (
    ImmediateSingularity,
    LeftChartDomain,
    PointOutsideDomain,
    SingularAbscissa,
    ZeroParameter,
)


def test_rk4_step_on_exponential():
    y = OdeService.rk4_step(lambda _t, y: y, 0.0, np.array([1.0]), 0.1)
    assert y[0] == pytest.approx(math.exp(0.1), abs=1e-7)


def test_step_halving_ratio_is_fourth_order():
    solve = lambda h: OdeService.integrate_to(lambda _t, y: np.array([y[1], -y[0]]), [0.0, 1.0], 1.0, h)
    ratio = OdeService.step_halving_ratio(solve, 0.1)
    assert 12.0 <= ratio <= 20.0


def test_step_halving_ratio_of_exact_problem_is_nan():
    solve = lambda h: OdeService.integrate_to(lambda _t, y: np.array([1.0]), [0.0], 1.0, h)
    assert math.isnan(OdeService.step_halving_ratio(solve, 0.1))


def test_alpha_order_on_warped_ode():
    a, alpha0 = 0.5, math.pi / 4
    rhs = lambda _t, y: np.array([OdeService.alpha_rhs(a, y[0])])
    ratio = OdeService.step_halving_ratio(lambda h: OdeService.integrate_to(rhs, [alpha0], 0.2, h), 0.04)
    assert 12.0 <= ratio <= 20.0


def test_alpha_table_is_linear_when_a_is_minus_one():
    table = OdeService.integrate_alpha(-1.0, math.pi / 4)
    u, alpha = table.nodes[:, 0], table.nodes[:, 1]
    assert_allclose(alpha, u + math.pi / 4, atol=1e-11)
    assert_allclose(table.nodes[:, 2], 1.0, atol=1e-11)


@pytest.mark.parametrize("a, alpha0", [(0.5, math.pi / 4), (-0.3, math.pi / 3), (2.0, 0.3)])
def test_alpha_table_respects_margins(a, alpha0):
    table = OdeService.integrate_alpha(a, alpha0, margin=0.05)
    alpha = table.nodes[:, 1]
    assert np.all(np.abs(np.cos(alpha)) >= 0.05)
    assert np.all(np.abs(np.sin(alpha)) >= 0.05)
    lower, upper = table.domain
    assert lower < 0.0 < upper
    value, first, _ = table.evaluate(0.0)
    assert value == pytest.approx(alpha0)
    assert first == pytest.approx(OdeService.alpha_rhs(a, alpha0))


def test_alpha_interpolant_matches_nodes():
    table = OdeService.integrate_alpha(0.5, math.pi / 4)
    row = table.nodes[len(table.nodes) // 3]
    assert_allclose(table.evaluate(row[0]), row[1:], atol=1e-10)


@pytest.mark.parametrize("a, alpha0", [(0.5, math.pi / 4), (-0.3, math.pi / 3)])
def test_alpha_interpolant_between_nodes_matches_reintegration(a, alpha0):
    table = OdeService.integrate_alpha(a, alpha0)
    rhs = lambda _t, y: np.array([OdeService.alpha_rhs(a, y[0])])
    u = table.nodes[:, 0]
    negative, positive = np.flatnonzero(u < 0.0), np.flatnonzero(u > 0.0)
    for i in (negative[len(negative) // 2], positive[0], positive[-2]):
        h = u[i + 1] - u[i]
        expected = OdeService.integrate_to(rhs, [table.nodes[i, 1]], h / 2, h / 20)[0]
        assert table.evaluate(u[i] + h / 2)[0] == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("alpha0", [0.0, math.pi / 2, 0.02])
def test_immediate_singularity(alpha0):
    with pytest.raises(ImmediateSingularity):
        OdeService.integrate_alpha(0.5, alpha0)


@given(
    a=st.sampled_from([0.5, 1.0, 2.0, -1.5]),
    x=st.floats(min_value=0.1, max_value=1.4),
    c=st.floats(min_value=-2.0, max_value=2.0),
)
@hyp_settings(max_examples=40, deadline=None)
def test_flat_closed_form_solves_field_equation(a, x, c):
    # dy/dx = -cot(a x) for xi = (sin(a x), -cos(a x))
    assume(abs(math.sin(a * x)) >= 0.05)
    h = 1e-6
    slope = (OdeService.flat_trajectory_closed_form(a, c, x + h) - OdeService.flat_trajectory_closed_form(a, c, x - h)) / (2 * h)
    assert slope == pytest.approx(-math.cos(a * x) / math.sin(a * x), rel=1e-5, abs=1e-6)


def test_closed_form_edge_cases():
    with pytest.raises(ZeroParameter):
        OdeService.flat_trajectory_closed_form(0.0, 0.0, 1.0)
    with pytest.raises(SingularAbscissa):
        OdeService.flat_trajectory_closed_form(1.0, 0.0, math.pi)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_integral_curve_follows_closed_form(a):
    flat = make_flat(2)
    xi = flat_tg_field(a, 0.0)
    phase = 1.2
    c = math.log(math.sin(phase)) / a
    start = Point.of("cartesian", [phase / a, 0.0])
    trajectory = OdeService.integral_curve(flat, xi, start, 1.0)
    assert not trajectory.truncated
    gaps = [abs(y - OdeService.flat_trajectory_closed_form(a, c, x)) for x, y in trajectory.coords]
    assert max(gaps) < 1e-6
    steps = np.linalg.norm(np.diff(trajectory.coords, axis=0), axis=1) / np.diff(trajectory.times)
    assert_allclose(steps, 1.0, atol=1e-4)


def test_trajectory_is_truncated_at_chart_boundary():
    surface = make_warped_surface(-1.0, math.pi / 4)
    xi = tg_field_2d(surface, 0.0)
    start = Point.of("uv", [0.0, 0.0])
    trajectory = OdeService.integral_curve(surface, xi, start, 3.0)
    assert trajectory.truncated
    assert "left chart" in trajectory.reason
    assert trajectory.times[-1] < 3.0
    with pytest.raises(LeftChartDomain):
        OdeService.integral_curve(surface, xi, start, 3.0, strict=True)


def test_start_outside_chart():
    surface = make_warped_surface(-1.0, math.pi / 4)
    with pytest.raises(PointOutsideDomain):
        OdeService.integral_curve(surface, tg_field_2d(surface, 0.0), Point.of("uv", [5.0, 0.0]), 1.0)


def test_trajectory_rows():
    flat = make_flat(2)
    trajectory = OdeService.integral_curve(flat, flat_tg_field(1.0, 0.0), Point.of("cartesian", [1.2, 0.0]), 0.01)
    c = math.log(math.sin(1.2))
    header, rows = OdeService.trajectory_rows(trajectory, lambda x: OdeService.flat_trajectory_closed_form(1.0, c, x))
    assert header == ["t", "x1", "x2", "y_closed_form", "abs_dy"]
    assert len(rows) == len(trajectory.times)
    assert rows[0][:3] == [0.0, 1.2, 0.0]
    assert rows[0][4] == pytest.approx(0.0, abs=1e-15)
