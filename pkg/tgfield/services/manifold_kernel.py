"""Chart-based Riemannian geometry: metric, connection, curvature, frames."""
from typing import Iterable, List, Optional, Sequence, Union
import logging
import math

import numpy as np

from tgfield.config import settings
from tgfield.models.geometry import (
    Chart,
    ChristoffelSample,
    Connection,
    FieldJet,
    FieldSpec,
    Frame,
    ManifoldSpec,
    MetricJet,
    Point,
    TangentVector,
)
from tgfield.utils import jets
from tgfield.utils.errors import (
    DegeneratePlane,
    DegenerateSeed,
    NonUnitField,
    PointOutsideDomain,
    SingularMetric,
)

logger = logging.getLogger(__name__)

VectorLike = Union[TangentVector, Sequence[float], np.ndarray]


def components(vector: VectorLike) -> np.ndarray:
    """Coordinate components of a TangentVector or a plain sequence."""
    if isinstance(vector, TangentVector):
        return vector.as_array()
    return np.asarray(vector, dtype=float)


class ManifoldKernel:
    """Pointwise Levi-Civita geometry of a chart-defined manifold."""

    @staticmethod
    def check_point(manifold: ManifoldSpec, point: Point) -> Chart:
        """
        Resolve the chart of a point and verify it lies in the chart domain.

        Args:
            manifold: Manifold the point belongs to
            point: Chart id and coordinates

        Returns:
            The chart of the point
        """
        try:
            chart = manifold.chart(point.chart)
        except KeyError as e:
            raise PointOutsideDomain(str(e)) from e
        if len(point.coords) != chart.dim:
            raise PointOutsideDomain(
                f"Point has {len(point.coords)} coordinates, chart {chart.id} has dimension {chart.dim}"
            )
        if not chart.domain.contains(point.coords):
            raise PointOutsideDomain(f"Point {point.coords} lies outside chart {chart.id} of {manifold.name}")
        return chart

    @staticmethod
    def _validate_metric(g: np.ndarray, point: Point) -> np.ndarray:
        scale = max(1.0, float(np.max(np.abs(g))))
        if np.max(np.abs(g - g.T)) > 1e-12 * scale:
            raise SingularMetric(f"Metric is not symmetric at {point.coords}")
        if np.min(np.linalg.eigvalsh(g)) <= settings.singular_metric_tol:
            raise SingularMetric(f"Metric is not positive definite at {point.coords}")
        return g

    @staticmethod
    def metric_at(manifold: ManifoldSpec, point: Point) -> np.ndarray:
        """Metric components g_ij at a point."""
        chart = ManifoldKernel.check_point(manifold, point)
        g = jets.values(chart.metric_fn(list(point.coords)))
        return ManifoldKernel._validate_metric(g, point)

    @staticmethod
    def metric_derivatives(
        manifold: ManifoldSpec,
        point: Point,
        method: Optional[str] = None,
        order: int = 2,
    ) -> MetricJet:
        """
        Metric with first and (optionally) second coordinate derivatives.

        Args:
            manifold: Manifold to evaluate on
            point: Evaluation point
            method: "jet" or "fd"; defaults to settings.derivative_method.
                Charts that cannot take jets always use their exact
                first-derivative provider or finite differences.
            order: 1 skips second derivatives

        Returns:
            MetricJet with dg[i, j, k] = d_k g_ij and d2g[i, j, k, m] = d_m d_k g_ij
        """
        chart = ManifoldKernel.check_point(manifold, point)
        method = method or settings.derivative_method
        x = point.as_array()
        n = chart.dim

        if method == "jet" and chart.jet_capable:
            g, dg, d2g = jets.unpack_matrix(chart.metric_fn(jets.seed(x)), n)
            ManifoldKernel._validate_metric(g, point)
            return MetricJet(point, g, dg, d2g if order > 1 else None, "jet")

        h2 = settings.fd_step_second
        if chart.metric_first_derivatives is not None:
            g, dg = chart.metric_first_derivatives(x)
            ManifoldKernel._validate_metric(g, point)
            d2g = None
            if order > 1:
                d2g = np.zeros((n, n, n, n))
                for m in range(n):
                    step = np.zeros(n)
                    step[m] = h2
                    _, dg_plus = chart.metric_first_derivatives(x + step)
                    _, dg_minus = chart.metric_first_derivatives(x - step)
                    d2g[:, :, :, m] = (dg_plus - dg_minus) / (2 * h2)
                d2g = 0.5 * (d2g + d2g.transpose(0, 1, 3, 2))
            return MetricJet(point, g, dg, d2g, "provider")

        def evaluate(y: np.ndarray) -> np.ndarray:
            return jets.values(chart.metric_fn(list(y)))

        h = settings.fd_step
        eye = np.eye(n)
        g = ManifoldKernel._validate_metric(evaluate(x), point)
        dg = np.zeros((n, n, n))
        for k in range(n):
            dg[:, :, k] = (evaluate(x + h * eye[k]) - evaluate(x - h * eye[k])) / (2 * h)

        d2g = None
        if order > 1:
            d2g = np.zeros((n, n, n, n))
            for k in range(n):
                d2g[:, :, k, k] = (evaluate(x + h2 * eye[k]) - 2 * g + evaluate(x - h2 * eye[k])) / h2**2
                for m in range(k + 1, n):
                    mixed = (
                        evaluate(x + h2 * (eye[k] + eye[m]))
                        - evaluate(x + h2 * (eye[k] - eye[m]))
                        - evaluate(x - h2 * (eye[k] - eye[m]))
                        + evaluate(x - h2 * (eye[k] + eye[m]))
                    ) / (4 * h2**2)
                    d2g[:, :, k, m] = mixed
                    d2g[:, :, m, k] = mixed
        return MetricJet(point, g, dg, d2g, "fd")

    @staticmethod
    def connection(
        manifold: ManifoldSpec,
        point: Point,
        method: Optional[str] = None,
        order: int = 2,
    ) -> Connection:
        """
        Christoffel symbols and, for order 2, their first derivatives.

        Returns:
            Connection with gamma[i, j, k] = Gamma^i_{jk} and
            dgamma[i, j, k, m] = d_m Gamma^i_{jk}
        """
        mj = ManifoldKernel.metric_derivatives(manifold, point, method=method, order=order)
        try:
            ginv = np.linalg.inv(mj.g)
        except np.linalg.LinAlgError as e:
            raise SingularMetric(f"Metric is not invertible at {point.coords}") from e

        dg = mj.dg
        gamma_lower = 0.5 * (
            np.einsum("lkj->ljk", dg) + dg - np.einsum("jkl->ljk", dg)
        )
        gamma = np.einsum("il,ljk->ijk", ginv, gamma_lower)

        dgamma = None
        if mj.d2g is not None:
            d2g = mj.d2g
            dginv = -np.einsum("ia,abm,bl->ilm", ginv, dg, ginv)
            dgamma_lower = 0.5 * (
                np.einsum("lkjm->ljkm", d2g) + d2g - np.einsum("jklm->ljkm", d2g)
            )
            dgamma = np.einsum("ilm,ljk->ijkm", dginv, gamma_lower) + np.einsum(
                "il,ljkm->ijkm", ginv, dgamma_lower
            )
        return Connection(point, mj.g, ginv, dg, gamma, dgamma)

    @staticmethod
    def christoffel_at(manifold: ManifoldSpec, point: Point, method: Optional[str] = None) -> ChristoffelSample:
        """Levi-Civita Christoffel symbols Gamma^i_{jk} at a point."""
        conn = ManifoldKernel.connection(manifold, point, method=method, order=1)
        return ChristoffelSample(point, conn.gamma)

    @staticmethod
    def riemann_from_connection(conn: Connection) -> np.ndarray:
        gamma, dgamma = conn.gamma, conn.dgamma
        return (
            np.einsum("iljk->ijkl", dgamma)
            - np.einsum("ikjl->ijkl", dgamma)
            + np.einsum("ikm,mlj->ijkl", gamma, gamma)
            - np.einsum("ilm,mkj->ijkl", gamma, gamma)
        )

    @staticmethod
    def riemann_tensor(manifold: ManifoldSpec, point: Point, method: Optional[str] = None) -> np.ndarray:
        """
        Curvature components with R(d_k, d_l) d_j = R[i, j, k, l] d_i.

        The operator is R(X, Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y].
        """
        conn = ManifoldKernel.connection(manifold, point, method=method)
        return ManifoldKernel.riemann_from_connection(conn)

    @staticmethod
    def apply_riemann(R: np.ndarray, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        return np.einsum("ijkl,j,k,l->i", R, Z, X, Y)

    @staticmethod
    def riemann_at(
        manifold: ManifoldSpec,
        point: Point,
        X: VectorLike,
        Y: VectorLike,
        Z: VectorLike,
        method: Optional[str] = None,
    ) -> TangentVector:
        """R(X, Y)Z in the coordinate basis."""
        R = ManifoldKernel.riemann_tensor(manifold, point, method=method)
        value = ManifoldKernel.apply_riemann(R, components(X), components(Y), components(Z))
        return TangentVector.of(point, value)

    @staticmethod
    def inner(g: np.ndarray, X: VectorLike, Y: VectorLike) -> float:
        return float(components(X) @ g @ components(Y))

    @staticmethod
    def norm(g: np.ndarray, X: VectorLike) -> float:
        return float(np.sqrt(max(ManifoldKernel.inner(g, X, X), 0.0)))

    @staticmethod
    def field_jet(
        manifold: ManifoldSpec,
        field: FieldSpec,
        point: Point,
        method: Optional[str] = None,
        check_unit: bool = True,
    ) -> FieldJet:
        """
        Field components with first and second coordinate derivatives.

        Args:
            manifold: Manifold carrying the field
            field: Field to differentiate
            point: Evaluation point
            method: "jet" or "fd"
            check_unit: Raise NonUnitField when a unit field is not unit at point

        Returns:
            FieldJet with grad[i, k] = d_k V^i and hess[i, k, m] = d_m d_k V^i
        """
        chart = ManifoldKernel.check_point(manifold, point)
        method = method or settings.derivative_method
        x = point.as_array()
        n = chart.dim

        if method == "jet":
            value, grad, hess = jets.unpack_vector(field.components_fn(chart.id, jets.seed(x)), n)
        else:
            def evaluate(y: np.ndarray) -> np.ndarray:
                return np.array([jets.value_of(c) for c in field.components_fn(chart.id, list(y))])

            h, h2 = settings.fd_step, settings.fd_step_second
            eye = np.eye(n)
            value = evaluate(x)
            grad = np.zeros((n, n))
            hess = np.zeros((n, n, n))
            for k in range(n):
                grad[:, k] = (evaluate(x + h * eye[k]) - evaluate(x - h * eye[k])) / (2 * h)
                hess[:, k, k] = (evaluate(x + h2 * eye[k]) - 2 * value + evaluate(x - h2 * eye[k])) / h2**2
                for m in range(k + 1, n):
                    mixed = (
                        evaluate(x + h2 * (eye[k] + eye[m]))
                        - evaluate(x + h2 * (eye[k] - eye[m]))
                        - evaluate(x - h2 * (eye[k] - eye[m]))
                        + evaluate(x - h2 * (eye[k] + eye[m]))
                    ) / (4 * h2**2)
                    hess[:, k, m] = mixed
                    hess[:, m, k] = mixed

        if check_unit and field.unit:
            g = jets.values(chart.metric_fn(list(x)))
            length = ManifoldKernel.norm(g, value)
            if abs(length - 1.0) > settings.identity_tol:
                raise NonUnitField(f"|{field.name}|_g = {length:.12g} at {point.coords}")
        return FieldJet(point, value, grad, hess)

    @staticmethod
    def covariant_derivative(
        manifold: ManifoldSpec,
        field: FieldSpec,
        X: TangentVector,
        method: Optional[str] = None,
    ) -> TangentVector:
        """(nabla_X V)^i = X(V^i) + Gamma^i_{jk} X^j V^k."""
        fj = ManifoldKernel.field_jet(manifold, field, X.at, method=method, check_unit=False)
        conn = ManifoldKernel.connection(manifold, X.at, method=method, order=1)
        x = X.as_array()
        value = fj.grad @ x + np.einsum("ijk,j,k->i", conn.gamma, x, fj.value)
        return TangentVector.of(X.at, value)

    @staticmethod
    def lie_bracket(
        manifold: ManifoldSpec,
        V: FieldSpec,
        W: FieldSpec,
        point: Point,
        method: Optional[str] = None,
    ) -> TangentVector:
        """[V, W]^i = V^k d_k W^i - W^k d_k V^i."""
        vj = ManifoldKernel.field_jet(manifold, V, point, method=method, check_unit=False)
        wj = ManifoldKernel.field_jet(manifold, W, point, method=method, check_unit=False)
        return TangentVector.of(point, wj.grad @ vj.value - vj.grad @ wj.value)

    @staticmethod
    def orthonormal_frame(
        g: np.ndarray,
        point: Point,
        seeds: Iterable[VectorLike],
        leading: Optional[VectorLike] = None,
    ) -> Frame:
        """
        Gram-Schmidt with column pivoting against the metric g.

        Args:
            g: Metric at point
            point: Base point of the frame
            seeds: Candidate vectors; at each step the one with the largest
                residual after projection is taken
            leading: Unit vector fixed as the first frame vector

        Returns:
            Frame of dim(g) orthonormal vectors
        """
        n = g.shape[0]
        basis: List[np.ndarray] = []
        if leading is not None:
            e1 = components(leading)
            basis.append(e1 / ManifoldKernel.norm(g, e1))
        pool = [components(s).copy() for s in seeds]

        while len(basis) < n:
            best, best_norm = None, -1.0
            for idx, candidate in enumerate(pool):
                residual = candidate - sum((ManifoldKernel.inner(g, e, candidate) * e for e in basis), np.zeros(n))
                length = ManifoldKernel.norm(g, residual)
                if length > best_norm:
                    best, best_norm = (idx, residual), length
            if best is None or best_norm < settings.degenerate_tol:
                raise DegenerateSeed(
                    f"Seed vectors span only {len(basis)} of {n} dimensions at {point.coords}"
                )
            idx, residual = best
            # Second projection pass keeps orthogonality at the 1e-15 level.
            residual = residual - sum((ManifoldKernel.inner(g, e, residual) * e for e in basis), np.zeros(n))
            basis.append(residual / ManifoldKernel.norm(g, residual))
            pool.pop(idx)

        return Frame.from_matrix(point, np.column_stack(basis))

    @staticmethod
    def adapted_frame(
        manifold: ManifoldSpec,
        xi: FieldSpec,
        point: Point,
        seed: Optional[Sequence[VectorLike]] = None,
    ) -> Frame:
        """
        Orthonormal frame with e_1 = xi(p) and e_2..e_n orthogonal to xi.

        Args:
            manifold: Manifold carrying the field
            xi: Unit vector field
            point: Base point
            seed: Vectors spanning a complement of xi; coordinate basis by default

        Returns:
            Adapted Frame
        """
        g = ManifoldKernel.metric_at(manifold, point)
        value = jets.values(xi.components_fn(point.chart, list(point.coords)))
        length = ManifoldKernel.norm(g, value)
        if abs(length - 1.0) > settings.identity_tol:
            raise NonUnitField(f"|{xi.name}|_g = {length:.12g} at {point.coords}")
        seeds = seed if seed is not None else list(np.eye(len(point.coords)))
        return ManifoldKernel.orthonormal_frame(g, point, seeds, leading=value)

    @staticmethod
    def sectional_curvature(
        manifold: ManifoldSpec,
        point: Point,
        X: VectorLike,
        Y: VectorLike,
        method: Optional[str] = None,
    ) -> float:
        """K(X, Y) = <R(X,Y)Y, X> / (|X|^2 |Y|^2 - <X,Y>^2)."""
        conn = ManifoldKernel.connection(manifold, point, method=method)
        return ManifoldKernel.sectional_from(conn, components(X), components(Y))

    @staticmethod
    def sectional_from(conn: Connection, X: np.ndarray, Y: np.ndarray) -> float:
        g = conn.g
        denominator = ManifoldKernel.inner(g, X, X) * ManifoldKernel.inner(g, Y, Y) - ManifoldKernel.inner(g, X, Y) ** 2
        if denominator < settings.degenerate_tol:
            raise DegeneratePlane(f"Vectors {X} and {Y} do not span a plane")
        R = ManifoldKernel.riemann_from_connection(conn)
        return ManifoldKernel.inner(g, ManifoldKernel.apply_riemann(R, X, Y, Y), X) / denominator

    @staticmethod
    def transition_point(manifold: ManifoldSpec, point: Point, target: str) -> Point:
        """Coordinates of the same point in another chart."""
        if point.chart == target:
            return point
        ManifoldKernel.check_point(manifold, point)
        transition = manifold.transitions.get((point.chart, target))
        if transition is None:
            raise PointOutsideDomain(f"No transition from chart {point.chart} to {target} on {manifold.name}")
        outside = f"{point.coords} in chart {point.chart} is not in the overlap with chart {target}"
        try:
            coords = [jets.value_of(c) for c in transition(list(point.coords))]
        except ZeroDivisionError as e:
            raise PointOutsideDomain(outside) from e
        if not all(math.isfinite(c) for c in coords):
            raise PointOutsideDomain(outside)
        mapped = Point.of(target, coords)
        ManifoldKernel.check_point(manifold, mapped)
        return mapped

    @staticmethod
    def transition_vector(manifold: ManifoldSpec, vector: TangentVector, target: str) -> TangentVector:
        """Push a tangent vector through the chart transition Jacobian."""
        point = vector.at
        if point.chart == target:
            return vector
        mapped = ManifoldKernel.transition_point(manifold, point, target)
        transition = manifold.transitions[(point.chart, target)]
        _, jacobian, _ = jets.unpack_vector(transition(jets.seed(point.as_array())), len(point.coords))
        return TangentVector.of(mapped, jacobian @ vector.as_array())
