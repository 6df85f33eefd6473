"""Sasaki geometry of the tangent bundle and of the image of a unit vector field."""
from typing import Optional, Tuple
import logging

import numpy as np

from tgfield.config import settings
from tgfield.models.geometry import (
    BundlePoint,
    BundleVector,
    Chart,
    CoordinateBox,
    FieldSpec,
    LiftDecomposition,
    ManifoldSpec,
    Point,
    TangentVector,
)
from tgfield.services.field_analysis import PointAnalysis
from tgfield.services.manifold_kernel import ManifoldKernel, VectorLike, components
from tgfield.utils import jets
from tgfield.utils.errors import BadConfig, NotOrthogonalToXi

logger = logging.getLogger(__name__)

SCALINGS = {"sasaki": 1.0, "quarter": 0.25}


class SasakiBundle:
    """Lifts, the Sasaki metric in natural coordinates, and the second fundamental form of xi(M)."""

    # Natural coordinates (u, xi) of TM

    @staticmethod
    def connection_matrix(gamma: np.ndarray, fiber: np.ndarray) -> np.ndarray:
        """C[i, k] = Gamma^i_{jk} xi^j, so that K(X~) = X~_fiber + C X~_base."""
        return np.einsum("ijk,j->ik", gamma, fiber)

    @staticmethod
    def sasaki_matrix(g: np.ndarray, C: np.ndarray) -> np.ndarray:
        """[[g + C^T g C, C^T g], [g C, g]]."""
        return np.block([[g + C.T @ g @ C, C.T @ g], [g @ C, g]])

    @staticmethod
    def _sasaki_matrix_derivative(g, C, dg, dC) -> np.ndarray:
        top_left = dg + dC.T @ g @ C + C.T @ dg @ C + C.T @ g @ dC
        top_right = dC.T @ g + C.T @ dg
        bottom_left = dg @ C + g @ dC
        return np.block([[top_left, top_right], [bottom_left, dg]])

    @staticmethod
    def _base(manifold: ManifoldSpec, Q: BundlePoint, order: int = 1):
        conn = ManifoldKernel.connection(manifold, Q.base, order=order)
        return conn, SasakiBundle.connection_matrix(conn.gamma, np.array(Q.fiber))

    @staticmethod
    def lifts(manifold: ManifoldSpec, Q: BundlePoint, X: VectorLike, kind: str) -> BundleVector:
        """
        Horizontal or vertical lift of a base vector to T_Q TM.

        Args:
            manifold: Base manifold
            Q: Bundle point (q, xi)
            X: Vector at q
            kind: "horizontal" or "vertical"

        Returns:
            BundleVector in natural coordinates
        """
        x = components(X)
        if kind == "vertical":
            ManifoldKernel.check_point(manifold, Q.base)
            return BundleVector.of(Q, np.concatenate([np.zeros_like(x), x]))
        if kind != "horizontal":
            raise BadConfig(f"Unknown lift kind {kind!r}")
        _, C = SasakiBundle._base(manifold, Q)
        return BundleVector.of(Q, np.concatenate([x, -C @ x]))

    @staticmethod
    def decompose(manifold: ManifoldSpec, V: BundleVector) -> LiftDecomposition:
        """Split a bundle vector into pi_* V and K V."""
        Q = V.at
        _, C = SasakiBundle._base(manifold, Q)
        n = len(Q.fiber)
        v = V.as_array()
        return LiftDecomposition(
            horizontal_part=TangentVector.of(Q.base, v[:n]),
            vertical_part=TangentVector.of(Q.base, v[n:] + C @ v[:n]),
        )

    @staticmethod
    def reassemble(manifold: ManifoldSpec, Q: BundlePoint, parts: LiftDecomposition) -> BundleVector:
        h = SasakiBundle.lifts(manifold, Q, parts.horizontal_part, "horizontal").as_array()
        v = SasakiBundle.lifts(manifold, Q, parts.vertical_part, "vertical").as_array()
        return BundleVector.of(Q, h + v)

    @staticmethod
    def sasaki_metric_at(manifold: ManifoldSpec, Q: BundlePoint) -> np.ndarray:
        """Sasaki metric of TM at Q in natural coordinates."""
        conn, C = SasakiBundle._base(manifold, Q)
        return SasakiBundle.sasaki_matrix(conn.g, C)

    @staticmethod
    def sasaki_inner(manifold: ManifoldSpec, V: BundleVector, W: BundleVector) -> float:
        G = SasakiBundle.sasaki_metric_at(manifold, V.at)
        return float(V.as_array() @ G @ W.as_array())

    @staticmethod
    def almost_complex_structure(manifold: ManifoldSpec, Q: BundlePoint) -> np.ndarray:
        """J with J X^h = X^v and J X^v = -X^h, as a 2n x 2n matrix in natural coordinates."""
        _, C = SasakiBundle._base(manifold, Q)
        n = C.shape[0]
        eye, zero = np.eye(n), np.zeros((n, n))
        lift_basis = np.block([[eye, zero], [-C, eye]])
        rotation = np.block([[zero, -eye], [eye, zero]])
        return lift_basis @ rotation @ np.linalg.inv(lift_basis)

    # TM as a 2n-dimensional chart manifold

    @staticmethod
    def sasaki_chart(manifold: ManifoldSpec, chart: Chart) -> Chart:
        """
        Chart of TM over a base chart with the Sasaki metric.

        The chart is evaluated on floats only; it carries the exact first
        derivatives of the Sasaki metric, assembled from the base connection
        and its derivatives.
        """
        n = chart.dim

        def split(z) -> Tuple[Point, np.ndarray]:
            z = np.array([jets.value_of(c) for c in z])
            return Point.of(chart.id, z[:n]), z[n:]

        def metric(z):
            base, fiber = split(z)
            conn = ManifoldKernel.connection(manifold, base, order=1)
            return SasakiBundle.sasaki_matrix(conn.g, SasakiBundle.connection_matrix(conn.gamma, fiber))

        def first_derivatives(z):
            base, fiber = split(z)
            conn = ManifoldKernel.connection(manifold, base, order=2)
            g = conn.g
            C = SasakiBundle.connection_matrix(conn.gamma, fiber)
            dG = np.zeros((2 * n, 2 * n, 2 * n))
            for m in range(n):
                dC = np.einsum("ijk,j->ik", conn.dgamma[:, :, :, m], fiber)
                dG[:, :, m] = SasakiBundle._sasaki_matrix_derivative(g, C, conn.dg[:, :, m], dC)
            zero = np.zeros((n, n))
            for j in range(n):
                dG[:, :, n + j] = SasakiBundle._sasaki_matrix_derivative(g, C, zero, conn.gamma[:, j, :])
            return SasakiBundle.sasaki_matrix(g, C), dG

        domain = CoordinateBox(
            chart.domain.lower + (-np.inf,) * n,
            chart.domain.upper + (np.inf,) * n,
        )
        return Chart(
            id=f"T{chart.id}",
            dim=2 * n,
            domain=domain,
            metric_fn=metric,
            jet_capable=False,
            metric_first_derivatives=first_derivatives,
        )

    @staticmethod
    def sasaki_manifold(manifold: ManifoldSpec) -> ManifoldSpec:
        return ManifoldSpec(
            name=f"T({manifold.name})",
            dim=2 * manifold.dim,
            charts=tuple(SasakiBundle.sasaki_chart(manifold, c) for c in manifold.charts),
            kind="sasaki",
        )

    # Kowalski formulas and their brute-force counterpart

    @staticmethod
    def kowalski_derivative(
        manifold: ManifoldSpec,
        Q: BundlePoint,
        combo: str,
        X: VectorLike,
        Y: VectorLike,
    ) -> LiftDecomposition:
        """
        Sasaki Levi-Civita derivative of lifted fields by the closed formulas.

        Y is extended as a coordinate-constant field, so nabla_X Y = Gamma(X, Y).

        Args:
            manifold: Base manifold
            Q: Bundle point (q, u)
            combo: "hh", "hv", "vh" or "vv" (kind of X lift, kind of Y lift)
            X: Direction at q
            Y: Field value at q

        Returns:
            (pi_*, K) of the derivative
        """
        if combo not in ("hh", "hv", "vh", "vv"):
            raise BadConfig(f"Unknown lift combination {combo!r}")
        x, y, u = components(X), components(Y), np.array(Q.fiber)
        conn = ManifoldKernel.connection(manifold, Q.base)
        R = ManifoldKernel.riemann_from_connection(conn)
        nabla_x_y = np.einsum("ijk,j,k->i", conn.gamma, x, y)
        zero = np.zeros_like(x)

        if combo == "hh":
            horizontal, vertical = nabla_x_y, -0.5 * ManifoldKernel.apply_riemann(R, x, y, u)
        elif combo == "hv":
            horizontal, vertical = 0.5 * ManifoldKernel.apply_riemann(R, u, y, x), nabla_x_y
        elif combo == "vh":
            horizontal, vertical = 0.5 * ManifoldKernel.apply_riemann(R, u, x, y), zero
        else:
            horizontal, vertical = zero, zero
        return LiftDecomposition(TangentVector.of(Q.base, horizontal), TangentVector.of(Q.base, vertical))

    @staticmethod
    def kowalski_brute_force(
        manifold: ManifoldSpec,
        Q: BundlePoint,
        combo: str,
        X: VectorLike,
        Y: VectorLike,
    ) -> LiftDecomposition:
        """Same derivative from the Christoffel symbols of the Sasaki metric on TM."""
        if combo not in ("hh", "hv", "vh", "vv"):
            raise BadConfig(f"Unknown lift combination {combo!r}")
        x, y, u = components(X), components(Y), np.array(Q.fiber)
        n = len(x)
        tm = SasakiBundle.sasaki_manifold(manifold)
        big_gamma = ManifoldKernel.christoffel_at(tm, Q.as_point(f"T{Q.base.chart}")).gamma
        conn = ManifoldKernel.connection(manifold, Q.base)
        C = SasakiBundle.connection_matrix(conn.gamma, u)

        direction = np.concatenate([x, -C @ x]) if combo[0] == "h" else np.concatenate([np.zeros(n), x])
        if combo[1] == "h":
            field = np.concatenate([y, -C @ y])
            # derivative of (Y, -Gamma(u) xi Y) along the direction
            d_fiber = -(
                np.einsum("ijkl,l,j,k->i", conn.dgamma, direction[:n], u, y)
                + np.einsum("ijk,j,k->i", conn.gamma, direction[n:], y)
            )
            d_field = np.concatenate([np.zeros(n), d_fiber])
        else:
            field = np.concatenate([np.zeros(n), y])
            d_field = np.zeros(2 * n)

        derivative = d_field + np.einsum("ijk,j,k->i", big_gamma, direction, field)
        return LiftDecomposition(
            TangentVector.of(Q.base, derivative[:n]),
            TangentVector.of(Q.base, derivative[n:] + C @ derivative[:n]),
        )

    # The image xi(M) in T_1 M

    @staticmethod
    def bundle_point(pa: PointAnalysis) -> BundlePoint:
        return BundlePoint.of(pa.point, pa.xi)

    @staticmethod
    def pushforward_at(pa: PointAnalysis, X: np.ndarray) -> np.ndarray:
        """xi_* X = (X, X(xi)) = X^h + (nabla_X xi)^v."""
        return np.concatenate([X, pa.dxi @ X])

    @staticmethod
    def normal_at(pa: PointAnalysis, N: np.ndarray) -> np.ndarray:
        """N~ = (A^t N)^h + N^v."""
        if abs(pa.inner(N, pa.xi)) > settings.identity_tol:
            raise NotOrthogonalToXi(f"<N, xi> = {pa.inner(N, pa.xi):.3e} at {pa.point.coords}")
        C = SasakiBundle.connection_matrix(pa.gamma, pa.xi)
        h = pa.At @ N
        return np.concatenate([h, N - C @ h])

    @staticmethod
    def sff_formula_at(pa: PointAnalysis, X: np.ndarray, Y: np.ndarray, N: np.ndarray) -> float:
        if abs(pa.inner(N, pa.xi)) > settings.identity_tol:
            raise NotOrthogonalToXi(f"<N, xi> = {pa.inner(N, pa.xi):.3e} at {pa.point.coords}")
        return -pa.inner(pa.hess(X, Y) + pa.A @ pa.hm(X, Y), N)

    @staticmethod
    def sff_oracle_at(
        pa: PointAnalysis,
        tm: ManifoldSpec,
        X: np.ndarray,
        Y: np.ndarray,
        N: np.ndarray,
    ) -> float:
        n = pa.dim
        Q = SasakiBundle.bundle_point(pa).as_point(f"T{pa.point.chart}")
        conn = ManifoldKernel.connection(tm, Q, order=1)
        G = conn.g

        push_x = SasakiBundle.pushforward_at(pa, X)
        push_y = SasakiBundle.pushforward_at(pa, Y)
        # derivative of u -> (Y, d_Y xi(u)) along X
        d_push_y = np.concatenate([np.zeros(n), np.einsum("ijl,j,l->i", pa.d2xi, Y, X)])
        ambient = d_push_y + np.einsum("ijk,j,k->i", conn.gamma, push_x, push_y)

        # T_1 M is the hypersurface |fiber| = 1 with unit normal xi^v
        xi_v = np.concatenate([np.zeros(n), pa.xi])
        tangential = ambient - float(ambient @ G @ xi_v) * xi_v
        return float(tangential @ G @ SasakiBundle.normal_at(pa, N))

    @staticmethod
    def pushforward(manifold: ManifoldSpec, xi: FieldSpec, X: TangentVector) -> BundleVector:
        pa = PointAnalysis(manifold, xi, X.at)
        return BundleVector.of(SasakiBundle.bundle_point(pa), SasakiBundle.pushforward_at(pa, X.as_array()))

    @staticmethod
    def normal_field(manifold: ManifoldSpec, xi: FieldSpec, N: TangentVector) -> BundleVector:
        pa = PointAnalysis(manifold, xi, N.at)
        return BundleVector.of(SasakiBundle.bundle_point(pa), SasakiBundle.normal_at(pa, N.as_array()))

    @staticmethod
    def sff_formula(manifold, xi, point, X: VectorLike, Y: VectorLike, N: VectorLike) -> float:
        """Second fundamental form -<Hess(X,Y) + A Hm(X,Y), N> of xi(M) along N~."""
        pa = PointAnalysis(manifold, xi, point)
        return SasakiBundle.sff_formula_at(pa, components(X), components(Y), components(N))

    @staticmethod
    def sff_oracle(manifold, xi, point, X: VectorLike, Y: VectorLike, N: VectorLike) -> float:
        """
        Second fundamental form recomputed on TM as a 2n-dimensional Riemannian manifold.

        Differentiates the embedding u -> (u, xi(u)) with the Christoffel
        symbols of the Sasaki metric, removes the component normal to T_1 M
        and pairs with N~.
        """
        pa = PointAnalysis(manifold, xi, point)
        tm = SasakiBundle.sasaki_manifold(manifold)
        return SasakiBundle.sff_oracle_at(pa, tm, components(X), components(Y), components(N))

    @staticmethod
    def mean_curvature(manifold, xi, point, N: VectorLike) -> float:
        """Trace of the second fundamental form along N~ with respect to the pull-back metric."""
        return SasakiBundle.mean_curvature_at(PointAnalysis(manifold, xi, point), components(N))

    @staticmethod
    def mean_curvature_at(pa: PointAnalysis, N: np.ndarray) -> float:
        h = pa.g + pa.A.T @ pa.g @ pa.A
        hinv = np.linalg.inv(h)
        basis = np.eye(pa.dim)
        omega = np.array(
            [[SasakiBundle.sff_formula_at(pa, basis[i], basis[j], N) for j in range(pa.dim)] for i in range(pa.dim)]
        )
        return float(np.sum(hinv * omega))

    # Pull-back metric on xi(M)

    @staticmethod
    def pullback_metric(manifold, xi, point, X: VectorLike, Y: VectorLike) -> float:
        """<X, Y> + <A X, A Y>."""
        pa = PointAnalysis(manifold, xi, point)
        x, y = components(X), components(Y)
        return pa.inner(x, y) + pa.inner(pa.A @ x, pa.A @ y)

    @staticmethod
    def pullback_chart(manifold: ManifoldSpec, xi: FieldSpec, chart: Chart, scale: float = 1.0) -> Chart:
        """
        The base chart carrying scale * (g + A^T g A).

        Exact first derivatives come from the second jets of g and xi.
        """

        def analysis(z) -> PointAnalysis:
            return PointAnalysis(manifold, xi, Point.of(chart.id, [jets.value_of(c) for c in z]))

        def metric(z):
            pa = analysis(z)
            return scale * (pa.g + pa.A.T @ pa.g @ pa.A)

        def first_derivatives(z):
            pa = analysis(z)
            g, A, dA = pa.g, pa.A, -pa.dN
            h = g + A.T @ g @ A
            dh = (
                pa.dg
                + np.einsum("klm,ki,lj->ijm", pa.dg, A, A)
                + np.einsum("kl,kim,lj->ijm", g, dA, A)
                + np.einsum("kl,ki,ljm->ijm", g, A, dA)
            )
            return scale * h, scale * dh

        return Chart(
            id=chart.id,
            dim=chart.dim,
            domain=chart.domain,
            metric_fn=metric,
            sample_box=chart.sample_box,
            jet_capable=False,
            metric_first_derivatives=first_derivatives,
        )

    @staticmethod
    def pullback_manifold(manifold: ManifoldSpec, xi: FieldSpec, scaling: str = "sasaki") -> ManifoldSpec:
        if scaling not in SCALINGS:
            raise BadConfig(f"Unknown scaling {scaling!r}; use one of {sorted(SCALINGS)}")
        scale = SCALINGS[scaling]
        return ManifoldSpec(
            name=f"{xi.name}({manifold.name}):{scaling}",
            dim=manifold.dim,
            charts=tuple(SasakiBundle.pullback_chart(manifold, xi, c, scale) for c in manifold.charts),
            kind="pullback",
        )

    @staticmethod
    def phi_sectional_curvature(
        manifold: ManifoldSpec,
        xi: FieldSpec,
        point: Point,
        X: VectorLike,
        scaling: str = "sasaki",
        pullback: Optional[ManifoldSpec] = None,
    ) -> float:
        """
        Sectional curvature of the pull-back metric on span{X, A X}.

        Args:
            manifold: Base sphere
            xi: Field (the Hopf field for the space-form check)
            point: Base point
            X: Vector orthogonal to xi
            scaling: "sasaki" for g + A^T g A, "quarter" for a quarter of it
            pullback: Prebuilt pull-back manifold to reuse across samples

        Returns:
            The phi-sectional curvature
        """
        pa = PointAnalysis(manifold, xi, point)
        x = components(X)
        if abs(pa.inner(x, pa.xi)) > settings.identity_tol * max(1.0, pa.norm(x)):
            raise NotOrthogonalToXi(f"X is not orthogonal to {xi.name} at {point.coords}")
        pullback = pullback or SasakiBundle.pullback_manifold(manifold, xi, scaling)
        return ManifoldKernel.sectional_curvature(pullback, point, x, pa.A @ x)
