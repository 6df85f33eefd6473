"""Fixed-step Runge-Kutta integration: the warped-surface angle ODE and integral curves."""
from typing import Callable, List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.interpolate import BPoly

from tgfield.config import settings
from tgfield.models.geometry import AlphaTable, FieldSpec, ManifoldSpec, Point, Trajectory
from tgfield.utils import jets
from tgfield.utils.errors import (
    ImmediateSingularity,
    LeftChartDomain,
    PointOutsideDomain,
    SingularAbscissa,
    ZeroParameter,
)

logger = logging.getLogger(__name__)

# Differences below this (relative) size are rounding noise
EXACT_STEP_TOL = 1e-13


class OdeService:
    """Integrators shared by the built-in manifolds and the trajectory suite."""

    @staticmethod
    def rk4_step(f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float) -> np.ndarray:
        """One classical fourth-order Runge-Kutta step of y' = f(t, y)."""
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    @staticmethod
    def integrate_to(
        f: Callable[[float, np.ndarray], np.ndarray],
        y0: Sequence[float],
        t_end: float,
        h: float,
    ) -> np.ndarray:
        """Integrate from t = 0 to t_end with round(t_end / h) equal steps."""
        steps = max(1, int(round(abs(t_end) / h)))
        dt = t_end / steps
        y = np.asarray(y0, dtype=float)
        for i in range(steps):
            y = OdeService.rk4_step(f, i * dt, y, dt)
        return y

    @staticmethod
    def step_halving_ratio(solve: Callable[[float], np.ndarray], h: float) -> float:
        """
        Richardson order estimate |y_h - y_{h/2}| / |y_{h/2} - y_{h/4}|.

        A fourth-order method gives a ratio near 16. Returns NaN when the two finer
        solutions agree to rounding, i.e. the problem is integrated exactly.
        """
        coarse, mid, fine = solve(h), solve(h / 2), solve(h / 4)
        denominator = float(np.linalg.norm(mid - fine))
        if denominator < EXACT_STEP_TOL * max(1.0, float(np.linalg.norm(fine))):
            return math.nan
        return float(np.linalg.norm(coarse - mid)) / denominator

    # Warped-surface angle ODE

    @staticmethod
    def alpha_rhs(a: float, alpha: float) -> float:
        """d(alpha)/du = 1 - (a + 1) / cos(alpha)."""
        return 1.0 - (a + 1.0) / math.cos(alpha)

    @staticmethod
    def alpha_second(a: float, alpha: float, alpha_prime: float) -> float:
        """Second derivative obtained by differentiating the right side."""
        c = math.cos(alpha)
        return -(a + 1.0) * math.sin(alpha) / (c * c) * alpha_prime

    @staticmethod
    def _inside_guard(alpha: float, margin: float) -> bool:
        return abs(math.cos(alpha)) >= margin and abs(math.sin(alpha)) >= margin

    @staticmethod
    def _march(a: float, alpha0: float, h: float, margin: float, max_span: float) -> List[Tuple[float, float]]:
        f = lambda _t, y: np.array([OdeService.alpha_rhs(a, y[0])])
        nodes = []
        u, y = 0.0, np.array([alpha0])
        steps = int(round(max_span / abs(h)))
        for _ in range(steps):
            try:
                y_next = OdeService.rk4_step(f, u, y, h)
            except (ZeroDivisionError, OverflowError):
                break
            if not np.isfinite(y_next[0]) or not OdeService._inside_guard(y_next[0], margin):
                break
            u, y = u + h, y_next
            nodes.append((u, float(y[0])))
        return nodes

    @staticmethod
    def integrate_alpha(
        a: float,
        alpha0: float,
        h: Optional[float] = None,
        margin: Optional[float] = None,
        max_span: Optional[float] = None,
    ) -> AlphaTable:
        """
        Tabulate alpha(u) in both directions from u = 0.

        Args:
            a: ODE parameter
            alpha0: alpha(0)
            h: RK4 step (settings.rk4_step by default)
            margin: Lower bound kept on |cos alpha| and |sin alpha|
            max_span: Largest |u| integrated in each direction

        Returns:
            AlphaTable whose nodes all satisfy the singularity margins
        """
        h = h or settings.rk4_step
        margin = settings.singularity_margin if margin is None else margin
        max_span = max_span or settings.alpha_max_span

        if not OdeService._inside_guard(alpha0, margin):
            raise ImmediateSingularity(
                f"alpha0 = {alpha0} is within {margin} of a zero of cos or sin"
            )

        forward = OdeService._march(a, alpha0, h, margin, max_span)
        backward = OdeService._march(a, alpha0, -h, margin, max_span)
        samples = list(reversed(backward)) + [(0.0, float(alpha0))] + forward
        if len(samples) < 3:
            raise ImmediateSingularity(f"alpha leaves the admissible band immediately for a={a}, alpha0={alpha0}")

        nodes = np.zeros((len(samples), 4))
        for row, (u, alpha) in enumerate(samples):
            first = OdeService.alpha_rhs(a, alpha)
            nodes[row] = (u, alpha, first, OdeService.alpha_second(a, alpha, first))

        interpolant = BPoly.from_derivatives(nodes[:, 0], nodes[:, 1:4].tolist())
        logger.info(
            f"Alpha table a={a} alpha0={alpha0}: {len(samples)} nodes on [{nodes[0, 0]:.4f}, {nodes[-1, 0]:.4f}]"
        )
        return AlphaTable(a=a, alpha0=alpha0, step=h, nodes=nodes, interpolant=interpolant)

    # Integral curves

    @staticmethod
    def integral_curve(
        manifold: ManifoldSpec,
        field: FieldSpec,
        p0: Point,
        length: float,
        h: Optional[float] = None,
        strict: bool = False,
    ) -> Trajectory:
        """
        RK4 integral curve of dp/dt = xi(p) inside the chart of p0.

        Args:
            manifold: Manifold carrying the field
            field: Vector field (unit fields give arc-length parameter)
            p0: Start point
            length: Parameter length T
            h: Step size
            strict: Raise LeftChartDomain instead of truncating

        Returns:
            Trajectory; truncated with a reason when the curve leaves the chart
        """
        chart = manifold.chart(p0.chart)
        if not chart.domain.contains(p0.coords):
            raise PointOutsideDomain(f"Start point {p0.coords} outside chart {chart.id}")

        h = h or settings.rk4_step
        steps = max(1, int(round(length / h)))
        dt = length / steps

        def rhs(_t: float, y: np.ndarray) -> np.ndarray:
            if not chart.domain.contains(y):
                raise LeftChartDomain(f"Curve left chart {chart.id} at {tuple(y)}")
            return np.array([jets.value_of(c) for c in field.components_fn(chart.id, list(y))])

        times = [0.0]
        coords = [p0.as_array()]
        truncated, reason = False, None
        y = coords[0]
        for i in range(steps):
            try:
                y = OdeService.rk4_step(rhs, i * dt, y, dt)
                if not chart.domain.contains(y):
                    raise LeftChartDomain(f"Curve left chart {chart.id} at {tuple(y)}")
            except LeftChartDomain as e:
                if strict:
                    raise
                truncated, reason = True, str(e)
                logger.warning(f"Trajectory of {field.name} truncated at t={times[-1]:.6f}: {e}")
                break
            times.append((i + 1) * dt)
            coords.append(y)

        return Trajectory(
            chart=chart.id,
            times=np.array(times),
            coords=np.array(coords),
            truncated=truncated,
            reason=reason,
        )

    @staticmethod
    def flat_trajectory_closed_form(a: float, c: float, x: float, omega0: float = 0.0) -> float:
        """
        y(x) = -(1/a) ln|sin(a x + omega0)| + c.

        Args:
            a: Angular speed of the field (nonzero)
            c: Integration constant
            x: Abscissa
            omega0: Phase of the field

        Returns:
            Ordinate of the trajectory
        """
        if a == 0:
            raise ZeroParameter("a = 0 trajectories are the vertical lines x = c")
        s = math.sin(a * x + omega0)
        if abs(s) < settings.degenerate_tol:
            raise SingularAbscissa(f"sin({a} * {x} + {omega0}) vanishes")
        return -math.log(abs(s)) / a + c

    # CSV rows

    @staticmethod
    def trajectory_rows(
        trajectory: Trajectory,
        closed_form: Optional[Callable[[float], float]] = None,
    ) -> Tuple[List[str], List[List[float]]]:
        """Header and rows (t, coordinates[, closed-form y, |dy|]) for CSV export."""
        dim = trajectory.coords.shape[1]
        header = ["t"] + [f"x{i + 1}" for i in range(dim)]
        if closed_form is not None:
            header += ["y_closed_form", "abs_dy"]
        rows = []
        for t, row in zip(trajectory.times, trajectory.coords):
            record = [float(t)] + [float(c) for c in row]
            if closed_form is not None:
                y_ref = closed_form(float(row[0]))
                record += [y_ref, abs(float(row[1]) - y_ref)]
            rows.append(record)
        return header, rows

    @staticmethod
    def alpha_table_rows(table: AlphaTable) -> Tuple[List[str], List[List[float]]]:
        return ["u", "alpha", "alpha_prime", "alpha_second"], table.nodes.tolist()
