"""Operator calculus of a unit vector field: shape operator, derivatives, residuals, classifiers."""
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from tgfield.config import settings
from tgfield.models.geometry import (
    CoordinateBox,
    FieldSpec,
    Frame,
    GeodesicCurvatureSample,
    ManifoldSpec,
    Point,
    QuadratureGrid,
    ShapeOperatorSample,
    TangentVector,
)
from tgfield.models.reports import ClassificationRecord, FlagResult
from tgfield.services.manifold_kernel import ManifoldKernel, VectorLike, components
from tgfield.utils.errors import NotASphere, PointOutsideDomain

logger = logging.getLogger(__name__)

CLASS_FLAGS = ("geodesic", "holonomic", "killing", "covariantly_normal", "strongly_normal", "invariant")


class PointAnalysis:
    """
    Everything about a unit field that is needed at one point.

    Holds g, the connection with its derivatives, the curvature tensor and
    the second jet of xi, and evaluates the tensors built from them. All
    vectors are coordinate components.
    """

    def __init__(
        self,
        manifold: ManifoldSpec,
        xi: FieldSpec,
        point: Point,
        method: Optional[str] = None,
        check_unit: bool = True,
    ):
        self.manifold = manifold
        self.field = xi
        self.point = point
        conn = ManifoldKernel.connection(manifold, point, method=method)
        fj = ManifoldKernel.field_jet(manifold, xi, point, method=method, check_unit=check_unit)

        self.connection = conn
        self.g, self.ginv, self.dg = conn.g, conn.ginv, conn.dg
        self.gamma, self.dgamma = conn.gamma, conn.dgamma
        self.R = ManifoldKernel.riemann_from_connection(conn)
        self.xi, self.dxi, self.d2xi = fj.value, fj.grad, fj.hess
        self.dim = len(self.xi)

        # N[i, j] = (nabla_{d_j} xi)^i and its coordinate derivative dN[i, j, l] = d_l N[i, j]
        self.N = self.dxi + np.einsum("ijk,k->ij", self.gamma, self.xi)
        self.dN = (
            self.d2xi
            + np.einsum("ijkl,k->ijl", self.dgamma, self.xi)
            + np.einsum("ijk,kl->ijl", self.gamma, self.dxi)
        )
        self.A = -self.N
        self.At = self.ginv @ self.A.T @ self.g
        self._frame: Optional[Frame] = None

    # Basic algebra

    def inner(self, X: np.ndarray, Y: np.ndarray) -> float:
        return float(X @ self.g @ Y)

    def norm(self, X: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(X, X), 0.0)))

    def christoffel(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.einsum("ijk,j,k->i", self.gamma, X, Y)

    def curvature(self, X: np.ndarray, Y: np.ndarray, Z: np.ndarray) -> np.ndarray:
        """R(X, Y)Z."""
        return ManifoldKernel.apply_riemann(self.R, X, Y, Z)

    @property
    def frame(self) -> Frame:
        """Adapted orthonormal frame with e_1 = xi."""
        if self._frame is None:
            self._frame = ManifoldKernel.orthonormal_frame(self.g, self.point, np.eye(self.dim), leading=self.xi)
        return self._frame

    @property
    def frame_matrix(self) -> np.ndarray:
        return self.frame.matrix

    def frame_operator(self, matrix: Optional[np.ndarray] = None) -> np.ndarray:
        """Matrix S of A_xi in the adapted orthonormal frame, S = E^T g A E."""
        E = self.frame_matrix if matrix is None else matrix
        return E.T @ self.g @ self.A @ E

    # First-order quantities

    def shape(self, X: np.ndarray) -> np.ndarray:
        """A_xi X = -nabla_X xi."""
        return self.A @ X

    def lie_derivative_metric(self, X: np.ndarray, Y: np.ndarray) -> float:
        """(L_xi g)(X, Y) = <nabla_X xi, Y> + <X, nabla_Y xi>."""
        return -self.inner(self.A @ X, Y) - self.inner(X, self.A @ Y)

    def bending_density(self) -> float:
        """|nabla xi|^2 = tr(A^t A)."""
        return float(np.trace(self.At @ self.A))

    # Second-order quantities

    def nabla_A(self, X: np.ndarray, Y: np.ndarray, dY: Optional[np.ndarray] = None) -> np.ndarray:
        """
        (nabla_X A_xi) Y with Y extended by its coordinate jacobian dY.

        Args:
            X: Direction
            Y: Argument at the point
            dY: dY[j, l] = d_l Y^j of the extension; zero (coordinate-constant) by default

        Returns:
            Coordinate components of (nabla_X A)Y
        """
        dY = np.zeros((self.dim, self.dim)) if dY is None else dY
        # W = nabla_Y xi along the extension of Y
        W = self.N @ Y
        dW = self.N @ dY + np.einsum("ijl,j->il", self.dN, Y)
        nabla_X_W = dW @ X + self.christoffel(X, W)
        nabla_X_Y = dY @ X + self.christoffel(X, Y)
        return -(nabla_X_W - self.N @ nabla_X_Y)

    def hess(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return 0.5 * (self.nabla_A(Y, X) + self.nabla_A(X, Y))

    def hm(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return 0.5 * (self.curvature(self.xi, self.A @ X, Y) + self.curvature(self.xi, self.A @ Y, X))

    def tg_residual(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Hess(X,Y) + A Hm(X,Y) - <AX, AY> xi; zero for totally geodesic fields."""
        return self.hess(X, Y) + self.A @ self.hm(X, Y) - self.inner(self.A @ X, self.A @ Y) * self.xi

    def sphere_tg_residual(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Totally geodesic condition rewritten with constant curvature 1."""
        A, xi = self.A, self.xi
        AX, AY = A @ X, A @ Y
        bracket = (
            self.lie_derivative_metric(X, Y) * (A @ xi)
            + self.inner(xi, X) * (A @ AY + Y)
            + self.inner(xi, Y) * (A @ AX - X)
        )
        return self.nabla_A(X, Y) - 0.5 * bracket - self.inner(AX, AY) * xi

    def codazzi_defect(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """(nabla_Y A)X - (nabla_X A)Y - R(X,Y)xi."""
        return self.nabla_A(Y, X) - self.nabla_A(X, Y) - self.curvature(X, Y, self.xi)

    def strong_normality_defect(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """(nabla_X A)Y - <AX, AY> xi, meaningful for X, Y orthogonal to xi."""
        return self.nabla_A(X, Y) - self.inner(self.A @ X, self.A @ Y) * self.xi

    def rough_laplacian(self) -> np.ndarray:
        """g^{jl} (nabla^2 xi)(d_l, d_j) assembled directly from the coordinate jets."""
        second = (
            np.einsum("ijl->ilj", self.dN)
            + np.einsum("ilk,kj->ilj", self.gamma, self.N)
            - np.einsum("klj,ik->ilj", self.gamma, self.N)
        )
        # second[i, l, j] = (nabla_{d_l} nabla_{d_j} xi - nabla_{nabla_{d_l} d_j} xi)^i
        return np.einsum("ilj,jl->i", second, self.ginv)

    def laplacian_from_hess(self) -> np.ndarray:
        """-sum_i Hess(e_i, e_i) over the adapted frame."""
        E = self.frame_matrix
        return -sum((self.hess(E[:, i], E[:, i]) for i in range(self.dim)), np.zeros(self.dim))

    def harmonic_residual(self) -> np.ndarray:
        return self.laplacian_from_hess() + self.bending_density() * self.xi

    def harmonic_map_residual(self) -> np.ndarray:
        E = self.frame_matrix
        return sum((self.hm(E[:, i], E[:, i]) for i in range(self.dim)), np.zeros(self.dim))

    # Geodesic curvature and minimality

    def geodesic_curvature(self) -> Tuple[float, Optional[np.ndarray]]:
        """k = |nabla_xi xi| and nu = -nabla_xi xi / k (None below the threshold)."""
        w = self.N @ self.xi
        k = self.norm(w)
        if k <= settings.geodesic_threshold:
            return k, None
        return k, -w / k

    def minimality_residual(self) -> np.ndarray:
        """
        k[xi, nu] + xi(k) nu - k A R(nu, xi)xi - k^2 xi, with nu = -nabla_xi xi / k.

        Returns zero when the integral curves are geodesics at the point
        (k below settings.geodesic_threshold).
        """
        xi = self.xi
        w = self.N @ xi
        k = self.norm(w)
        if k < settings.geodesic_threshold:
            return np.zeros(self.dim)

        # d_l w^i for w = nabla_xi xi
        dw = np.einsum("ijl,j->il", self.dN, xi) + self.N @ self.dxi
        dk = (2.0 * (w @ self.g @ dw) + np.einsum("i,ijl,j->l", w, self.dg, w)) / (2.0 * k)
        nu = -w / k
        dnu = -dw / k + np.outer(w, dk) / k**2

        nabla_xi_nu = dnu @ xi + self.christoffel(xi, nu)
        bracket = nabla_xi_nu - self.N @ nu
        xi_k = float(dk @ xi)
        return k * bracket + xi_k * nu - k * (self.A @ self.curvature(nu, xi, xi)) - k * k * xi

    # Classification

    def class_defects(self) -> Dict[str, float]:
        """Per-flag defects at this point, measured in the adapted frame."""
        S = self.frame_operator()
        E = self.frame_matrix
        n = self.dim

        strong = 0.0
        for a in range(1, n):
            for b in range(1, n):
                strong = max(strong, self.norm(self.strong_normality_defect(E[:, a], E[:, b])))

        target = -np.eye(n)
        target[0, 0] = 0.0
        invariant = max(
            float(np.max(np.abs(S @ S - target))),
            float(np.max(np.abs(S[:, 0]))),
            float(np.max(np.abs(S[0, :]))),
        )
        return {
            "geodesic": self.norm(self.A @ self.xi),
            "holonomic": float(np.max(np.abs(S - S.T))),
            "killing": float(np.max(np.abs(S + S.T))),
            "covariantly_normal": float(np.max(np.abs(S.T @ S - S @ S.T))),
            "strongly_normal": strong,
            "invariant": invariant,
        }


def _vec(X: VectorLike) -> np.ndarray:
    return components(X)


class FieldAnalysis:
    """Pointwise residuals and classifiers for unit vector fields."""

    @staticmethod
    def at(manifold: ManifoldSpec, xi: FieldSpec, point: Point, method: Optional[str] = None) -> PointAnalysis:
        return PointAnalysis(manifold, xi, point, method=method)

    @staticmethod
    def shape_operator(
        manifold: ManifoldSpec,
        xi: FieldSpec,
        point: Point,
        frame: Optional[Frame] = None,
    ) -> ShapeOperatorSample:
        """
        Matrix of A_xi and its adjoint in an orthonormal frame.

        Args:
            manifold: Manifold
            xi: Unit field
            point: Evaluation point
            frame: Orthonormal frame; the adapted frame by default

        Returns:
            ShapeOperatorSample with column i = A e_i in frame components
        """
        pa = PointAnalysis(manifold, xi, point)
        frame = frame or pa.frame
        S = pa.frame_operator(frame.matrix)
        return ShapeOperatorSample(point, S, S.T.copy(), frame)

    @staticmethod
    def nabla_A(manifold, xi, point, X: VectorLike, Y: VectorLike, dY: Optional[np.ndarray] = None) -> TangentVector:
        pa = PointAnalysis(manifold, xi, point)
        return TangentVector.of(point, pa.nabla_A(_vec(X), _vec(Y), dY))

    @staticmethod
    def hess(manifold, xi, point, X: VectorLike, Y: VectorLike) -> TangentVector:
        pa = PointAnalysis(manifold, xi, point)
        return TangentVector.of(point, pa.hess(_vec(X), _vec(Y)))

    @staticmethod
    def hm(manifold, xi, point, X: VectorLike, Y: VectorLike) -> TangentVector:
        pa = PointAnalysis(manifold, xi, point)
        return TangentVector.of(point, pa.hm(_vec(X), _vec(Y)))

    @staticmethod
    def harmonic_residual(manifold, xi, point) -> Tuple[TangentVector, float]:
        pa = PointAnalysis(manifold, xi, point)
        r = pa.harmonic_residual()
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def harmonic_map_residual(manifold, xi, point) -> Tuple[TangentVector, float]:
        pa = PointAnalysis(manifold, xi, point)
        r = pa.harmonic_map_residual()
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def rough_laplacian(manifold, xi, point) -> TangentVector:
        pa = PointAnalysis(manifold, xi, point)
        return TangentVector.of(point, pa.rough_laplacian())

    @staticmethod
    def tg_residual(manifold, xi, point, X: VectorLike, Y: VectorLike) -> Tuple[TangentVector, float]:
        pa = PointAnalysis(manifold, xi, point)
        r = pa.tg_residual(_vec(X), _vec(Y))
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def sphere_tg_residual(manifold, xi, point, X: VectorLike, Y: VectorLike) -> Tuple[TangentVector, float]:
        if manifold.kind != "sphere":
            raise NotASphere(f"{manifold.name} is not a round sphere")
        pa = PointAnalysis(manifold, xi, point)
        r = pa.sphere_tg_residual(_vec(X), _vec(Y))
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def codazzi_defect(manifold, xi, point, X: VectorLike, Y: VectorLike) -> Tuple[TangentVector, float]:
        pa = PointAnalysis(manifold, xi, point)
        r = pa.codazzi_defect(_vec(X), _vec(Y))
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def strong_normality_defect(manifold, xi, point, X: VectorLike, Y: VectorLike) -> Tuple[TangentVector, float]:
        pa = PointAnalysis(manifold, xi, point)
        r = pa.strong_normality_defect(_vec(X), _vec(Y))
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def lie_derivative_metric(manifold, xi, point, X: VectorLike, Y: VectorLike) -> float:
        return PointAnalysis(manifold, xi, point).lie_derivative_metric(_vec(X), _vec(Y))

    @staticmethod
    def geodesic_curvature(manifold, xi, point) -> GeodesicCurvatureSample:
        pa = PointAnalysis(manifold, xi, point)
        k, nu = pa.geodesic_curvature()
        return GeodesicCurvatureSample(point, k, None if nu is None else TangentVector.of(point, nu))

    @staticmethod
    def minimality_residual(manifold, xi, point) -> Tuple[TangentVector, float]:
        pa = PointAnalysis(manifold, xi, point)
        r = pa.minimality_residual()
        return TangentVector.of(point, r), pa.norm(r)

    @staticmethod
    def classify(
        manifold: ManifoldSpec,
        xi: FieldSpec,
        sample_points: Sequence[Point],
        tolerance: Optional[float] = None,
    ) -> ClassificationRecord:
        """
        Decide class membership of a field from per-sample defects.

        Args:
            manifold: Manifold
            xi: Unit field
            sample_points: Points to test
            tolerance: Threshold for every flag (settings.classifier_tol by default)

        Returns:
            ClassificationRecord with max defect and verdict per flag
        """
        tolerance = tolerance or settings.classifier_tol
        worst = {name: 0.0 for name in CLASS_FLAGS}
        for point in sample_points:
            defects = PointAnalysis(manifold, xi, point).class_defects()
            for name, value in defects.items():
                worst[name] = max(worst[name], value)
        return FieldAnalysis.record_from_defects(worst, tolerance, sample_points)

    @staticmethod
    def record_from_defects(
        worst: Dict[str, float],
        tolerance: float,
        sample_points: Sequence[Point],
    ) -> ClassificationRecord:
        flags = {
            name: FlagResult(holds=worst[name] < tolerance, max_defect=worst[name], tolerance=tolerance)
            for name in CLASS_FLAGS
        }
        notes = [
            "covariant normality is tested as A A^t = A^t A with the metric adjoint, "
            "which does not depend on the orthonormal frame"
        ]
        if flags["covariantly_normal"].holds and not flags["geodesic"].holds:
            message = "covariantly normal but not geodesic on the sample set"
            logger.warning(message)
            notes.append(message)
        return ClassificationRecord(
            **flags,
            chart=sample_points[0].chart if sample_points else None,
            sample_points=[list(p.coords) for p in sample_points],
            notes=notes,
        )

    @staticmethod
    def total_bending(manifold: ManifoldSpec, xi: FieldSpec, grid: QuadratureGrid) -> float:
        """
        Gauss-Legendre quadrature of |nabla xi|^2 dVol over a chart box.

        Args:
            manifold: Manifold
            xi: Unit field
            grid: Finite box in one chart and nodes per axis

        Returns:
            The total bending with normalizing constant 1
        """
        box = grid.box
        if not box.is_finite():
            raise PointOutsideDomain("Total bending needs a finite coordinate box")
        nodes, weights = np.polynomial.legendre.leggauss(grid.nodes_per_axis)
        lower, upper = np.array(box.lower), np.array(box.upper)
        half = 0.5 * (upper - lower)
        mid = 0.5 * (upper + lower)
        dim = len(lower)

        total = 0.0
        for index in np.ndindex(*(grid.nodes_per_axis,) * dim):
            coords = mid + half * nodes[list(index)]
            point = Point.of(grid.chart, coords)
            conn = ManifoldKernel.connection(manifold, point, order=1)
            fj = ManifoldKernel.field_jet(manifold, xi, point)
            N = fj.grad + np.einsum("ijk,k->ij", conn.gamma, fj.value)
            density = float(np.trace(N.T @ conn.g @ N @ conn.ginv))
            weight = float(np.prod(weights[list(index)]) * np.prod(half))
            total += weight * density * float(np.sqrt(np.linalg.det(conn.g)))
        logger.info(f"Total bending of {xi.name} over {box}: {total:.10g}")
        return total
