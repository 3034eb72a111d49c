"""Exception hierarchy shared by the planning engine, the CLI and the API."""


class PlanningError(Exception):
    """Base class for every engine error."""
    exit_code = 2
    http_status = 422


class InputError(PlanningError):
    """Raised when user-supplied input is malformed or inconsistent."""
    pass


class ParseError(InputError):
    """Raised when planning text cannot be parsed."""

    def __init__(self, message: str, line: int = None, column: int = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


class UnsupportedConstructError(ParseError):
    """Raised when planning text uses a construct outside the STRIPS subset."""
    pass


class ModelError(InputError):
    """Raised when an Action or Model violates its construction invariants."""
    pass


class EncodingError(InputError):
    """Raised when a model-fluent set cannot be decoded into a Model."""
    pass


class EditError(InputError):
    """Raised when a model edit is a no-op or cannot be applied."""
    pass


class VocabularyError(InputError):
    """Raised when the robot and human models do not share a signature."""
    pass


class ScenarioError(InputError):
    """Raised when a scenario spec cannot be realised."""
    pass


class DeltaTooLargeError(InputError):
    """Raised when the model difference is too large for exhaustive enumeration."""
    pass


class UnsolvableError(PlanningError):
    """Raised when no plan or no admissible solution exists."""
    exit_code = 1
    http_status = 409


class ResourceLimitError(PlanningError):
    """Raised when a search exceeds its configured resources."""
    exit_code = 3
    http_status = 503


class PlannerLimitError(ResourceLimitError):
    """Raised when a planner call exceeds its node or time cap."""

    def __init__(self, message: str, nodes_expanded: int = 0):
        self.nodes_expanded = nodes_expanded
        super().__init__(message)
