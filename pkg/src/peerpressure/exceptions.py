"""Exception hierarchy.

Everything raised on bad input derives from :class:`PeerPressureError`, and
most of it also from :class:`ValueError` so callers that only know the
standard library still catch it.
"""


class PeerPressureError(Exception):
    """Base class for all package errors."""


# graph construction

class GraphError(PeerPressureError, ValueError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateEdge(GraphError):
    pass


class NonPositiveWeight(GraphError):
    pass


class Disconnected(GraphError):
    pass


class InvalidParams(PeerPressureError, ValueError):
    """Generator parameters out of range (e.g. ``n <= m`` for BA)."""


class ParseError(PeerPressureError, ValueError):
    """Malformed CSV input."""


# linear algebra

class NotPositiveDefinite(PeerPressureError, ValueError):
    pass


class SingularUpdate(PeerPressureError, ValueError):
    pass


class NoConvergence(PeerPressureError, RuntimeError):
    pass


class DegenerateInput(PeerPressureError, ValueError):
    pass


# dynamics / diagnostics / inference

class InvalidSchedule(PeerPressureError, ValueError):
    pass


class InvalidProfile(PeerPressureError, ValueError):
    pass


class DegenerateTrajectory(PeerPressureError, ValueError):
    pass


class DimensionMismatch(PeerPressureError, ValueError):
    pass


class OutOfRangeOpinion(PeerPressureError, ValueError):
    pass
