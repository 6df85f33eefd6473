"""Exception hierarchy shared by the services and the command line."""


class GeometryError(ValueError):
    """Base class for rejected geometric inputs."""


class PointOutsideDomain(GeometryError):
    """A point lies outside the open coordinate box of its chart."""


class SingularMetric(GeometryError):
    """The metric is not positive definite (or not invertible) at a point."""


class DegenerateSeed(GeometryError):
    """Gram-Schmidt could not complete a frame from the given seed vectors."""


class DegeneratePlane(GeometryError):
    """Two vectors do not span a plane."""


class NonUnitField(GeometryError):
    """A field declared unit has |xi|_g != 1 at the evaluation point."""


class NotASphere(GeometryError):
    """An operation restricted to round spheres received another manifold."""


class NotOrthogonalToXi(GeometryError):
    """A normal direction N is not orthogonal to the field."""


class ImmediateSingularity(GeometryError):
    """The initial angle of the warped-surface ODE sits inside a singularity margin."""


class LeftChartDomain(GeometryError):
    """An integral curve left the chart domain."""


class ZeroParameter(GeometryError):
    """A closed form was called with a = 0 where only a != 0 is valid."""


class SingularAbscissa(GeometryError):
    """sin(ax) vanishes at the requested abscissa."""


class ConfigError(ValueError):
    """Base class for command-line and suite configuration problems."""


class UnknownRegistryKey(ConfigError):
    """A manifold or field key does not resolve in the registry."""


class BadConfig(ConfigError):
    """A suite configuration is inconsistent."""
