"""Exception types shared across the toolkit."""


class QnkError(Exception):
    """Base class for all toolkit errors."""

    code = "QnkError"


class IndexOutOfRange(QnkError):
    code = "IndexOutOfRange"


class DuplicateSimplex(QnkError):
    code = "DuplicateSimplex"


class ImproperIntersection(QnkError):
    code = "ImproperIntersection"


class DegenerateSimplex(QnkError):
    code = "DegenerateSimplex"


class DegenerateTet(DegenerateSimplex):
    code = "DegenerateTet"


class InconsistentMidpoint(QnkError):
    code = "InconsistentMidpoint"


class NonManifoldSurface(QnkError):
    code = "NonManifoldSurface"


class PerturbationFailed(QnkError):
    code = "PerturbationFailed"


class DegenerateSpan(QnkError):
    code = "DegenerateSpan"


class NotAGraph(QnkError):
    code = "NotAGraph"


class SelfIntersectingRegion(QnkError):
    code = "SelfIntersectingRegion"


class GluingMismatch(QnkError):
    code = "GluingMismatch"


class PointNotOnEdge(QnkError):
    code = "PointNotOnEdge"


class EmptyMesh(QnkError):
    code = "EmptyMesh"


class FormatError(QnkError):
    """Malformed input file."""

    code = "FormatError"
