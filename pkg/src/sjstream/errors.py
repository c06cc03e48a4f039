"""Exception types shared across the package."""


class SJStreamError(Exception):
    """Base class for all errors raised by sjstream."""


class SchemaViolation(SJStreamError):
    """Edge or vertex contradicts the registered type schema."""


class TimestampRegression(SJStreamError):
    """Edge timestamp is below the allowed disorder slack."""


class UnknownVertex(SJStreamError):
    """Vertex id is not present in the graph."""


class UnknownEdge(SJStreamError):
    """Edge id is not present in the graph."""


class DomainMismatch(SJStreamError):
    """A projection target is not contained in the mapping's domain."""


class DuplicateMatch(SJStreamError):
    """A partial match with the same signature is already stored at the node."""


class NotAStar(SJStreamError):
    """Primitive passed to the star matcher has no center vertex."""


class SizeGuardExceeded(SJStreamError):
    """Snapshot is too large for exhaustive enumeration."""


class SpecError(SJStreamError):
    """Query spec is malformed or fails join-tree validation."""


class ConfigError(SJStreamError):
    """Generator configuration is invalid."""


class InsufficientLabels(SJStreamError):
    """A degree bin has no candidate labels to instantiate the query with."""


class ParseError(SJStreamError):
    """Malformed line in an edge-stream file."""

    def __init__(self, line: int, column: int, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, col {column}: {reason}")
