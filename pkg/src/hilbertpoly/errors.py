"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`HilbertGeometryError`, which is itself a ``ValueError`` so callers
that only care about bad input can catch that.
"""


class HilbertGeometryError(ValueError):
    """Base class for domain errors."""

    #: short name of the violated invariant, used by the CLI
    invariant = "domain"


class DegenerateInput(HilbertGeometryError):
    invariant = "affinely-spanning input"


class UnboundedPolytope(HilbertGeometryError):
    invariant = "bounded polytope"


class EmptyInterior(HilbertGeometryError):
    invariant = "non-empty interior"


class PointOutside(HilbertGeometryError):
    invariant = "point strictly interior"


class ZeroDirection(HilbertGeometryError):
    invariant = "nonzero direction"


class WrongDimension(HilbertGeometryError):
    invariant = "dimension"


class InvalidVertex(HilbertGeometryError):
    invariant = "extremal vertex"


class InsufficientSamples(HilbertGeometryError):
    invariant = "sample budget"


class InvalidNeighborhood(HilbertGeometryError):
    invariant = "shared simplex contained in both polytopes"


class NoPreimage(HilbertGeometryError):
    invariant = "target class in embedding image"
