"""Exception taxonomy shared by all modules."""


class GeometryError(Exception):
    """Base class for all numerical-geometry errors."""


class NotInOverlap(GeometryError):
    """Point does not lie in the overlap of the two charts involved."""


class ChartMissing(GeometryError):
    """Requested chart has no data (field / connection not defined there)."""


class StencilLeavesDomain(GeometryError):
    """A finite-difference stencil would leave the chart domain."""


class LeftAtlas(GeometryError):
    """Integration state is not contained in any chart."""


class HopLimit(GeometryError):
    """Chart hand-off count exceeded the configured maximum."""


class NoCommonChart(GeometryError):
    """Two points cannot be expressed in any single chart."""


class NoConvergence(GeometryError):
    """Iterative solver failed to converge (target likely out of range)."""


class SingularFrame(GeometryError):
    """Frame matrix is numerically singular."""


class SingularGroupElement(GeometryError):
    """Group element is not invertible."""


class SeedChartMismatch(GeometryError):
    """Killing seed chart does not match the transport path start."""


class BasePointMismatch(GeometryError):
    """Seeds do not share a base point."""


class NotKilling(GeometryError):
    """Vector field failed the infinitesimal-affine verification."""


class ScenarioError(Exception):
    """Base class for harness/scenario errors."""


class ParseError(ScenarioError):
    """Scenario file is malformed; message carries field diagnostics."""


class UnknownCatalogName(ScenarioError):
    """Scenario references a name missing from the catalog."""


class IoError(ScenarioError):
    """Emitting a report or trajectory failed."""
