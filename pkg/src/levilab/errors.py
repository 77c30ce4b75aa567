"""Exception hierarchy shared by all levilab modules."""


class LeviLabError(Exception):
    """Base class for every error raised by levilab."""


class ExprSyntaxError(LeviLabError):
    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UnknownIdentifierError(ExprSyntaxError):
    pass


class VariableIndexError(ExprSyntaxError):
    pass


class DomainError(LeviLabError):
    """Evaluation left the domain of a node (log of 0, division by 0, ...).

    ``path`` lists the child indices from the root to the offending node.
    """

    def __init__(self, message, path=()):
        where = "/".join(str(i) for i in path) or "<root>"
        super().__init__(f"{message} at node {where}")
        self.path = tuple(path)


class NonSmoothError(LeviLabError):
    """Differentiation reached a node that has no symbolic derivative (``max``)."""

    def __init__(self, message, path=()):
        where = "/".join(str(i) for i in path) or "<root>"
        super().__init__(f"{message} at node {where}")
        self.path = tuple(path)


class NotHermitianError(LeviLabError):
    pass


class DegenerateGradientError(LeviLabError):
    """A defining function has a (numerically) vanishing gradient."""


class PreconditionError(LeviLabError):
    pass


class BoundaryNotFoundError(LeviLabError):
    """No ray from the query point reached the boundary inside the search region."""


class ScenarioError(LeviLabError):
    """Scenario validation failure; ``pointer`` names the offending field."""

    def __init__(self, pointer, message):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
