"""Shared exception types.

Every domain failure raises a subclass of HingeLabError so the CLI can
map library errors to exit code 1 and schema problems to exit code 2.
"""


class HingeLabError(Exception):
    """Base class for all library errors."""


class BackendMismatchError(HingeLabError):
    """Exact and float values were mixed in one operation."""


class DimensionError(HingeLabError):
    """Ambient dimensions or shapes do not match."""


class SingularMatrixError(HingeLabError):
    """An invertible matrix was required."""


class NotSymmetricError(HingeLabError):
    """A symmetric matrix or relation was required."""


class HingeConditionError(HingeLabError):
    """A hinge condition (0/1/2) failed.

    Carries the name of the violated condition so callers and the CLI
    can report it verbatim.
    """

    def __init__(self, condition: str, detail: str):
        self.condition = condition
        self.detail = detail
        super().__init__(f"hinge condition {condition}: {detail}")


class ClusteringAmbiguityError(HingeLabError):
    """Growth-rate clustering was ambiguous at the requested tolerance."""


class SchemaError(HingeLabError):
    """A JSON payload did not match the expected schema."""
