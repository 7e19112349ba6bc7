"""Exception hierarchy shared across the package."""


class RuleGridError(Exception):
    """Base class for all rulegrid errors."""


class DataError(RuleGridError):
    """Problems with user-supplied data (CSV files, schemas, instances)."""


class ParseError(DataError):
    """A CSV cell or row could not be parsed. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    """Dataset schema violation: unknown label, too few classes, bad column."""


class InputError(DataError):
    """An instance vector is unusable (wrong arity, non-finite values)."""


class ModelJsonError(RuleGridError):
    """Forest JSON does not conform to the canonical schema.

    ``path`` names the JSON location of the violation, e.g. ``trees[0].nodes[3].left``.
    """

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class EmptyViewError(RuleGridError):
    """A rule filter selected zero rules; the caller decides how to present this."""


class OrderingError(RuleGridError):
    """An ordering criterion is invalid for the view kind or target it was applied to."""


class InvariantError(RuleGridError):
    """An internal invariant was violated (a defect, never silently handled)."""


class StaleChangeError(RuleGridError):
    """A change vector does not belong to the given instance/forest pair."""


class RenderError(RuleGridError):
    """The view cannot be rendered against the given dataset/forest."""
