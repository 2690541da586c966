"""Exception types shared across the workbench."""


class WorkbenchError(Exception):
    """Base class for all domain errors raised by this package."""


class CoordinateError(WorkbenchError):
    """Non-finite or otherwise malformed keypoint coordinates."""


class KeypointIndexError(WorkbenchError):
    """Duplicate or out-of-range keypoint indices."""


class ShapeError(WorkbenchError):
    """Inconsistent array shapes or keypoint counts."""


class DegenerateGeometryError(WorkbenchError):
    """Geometry too degenerate to measure (coincident points, zero width)."""


class PolicyError(WorkbenchError):
    """Malformed interaction policy (bad probability vector)."""


class SessionError(WorkbenchError):
    """Unknown, finalized, or otherwise unusable annotation session."""
