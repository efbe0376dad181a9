"""Exception types shared across the package."""


class AtlirError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(AtlirError):
    """A game structure is malformed or was queried inconsistently."""

    def __init__(self, message, issues=()):
        super().__init__(message)
        self.issues = tuple(issues)


class UnknownState(ModelError):
    pass


class UnknownAgent(ModelError):
    pass


class DisabledJointAction(ModelError):
    pass


class IncompleteStrategy(ModelError):
    pass


class CoalitionMismatch(AtlirError):
    """Two move sets (or a move set and a coalition) disagree on the coalition."""


class AgentNotInCoalition(AtlirError):
    pass


class FormulaError(AtlirError):
    pass


class FormulaSyntaxError(FormulaError):
    """Bad concrete syntax; carries the offending position."""

    def __init__(self, message, position):
        super().__init__("%s (at position %d)" % (message, position))
        self.position = position


class UnknownProposition(FormulaError):
    pass


class UnsupportedOperator(FormulaError):
    """The formula falls outside the fragment the checker handles."""


class EnumerationCapExceeded(AtlirError):
    """Exhaustive strategy enumeration would exceed the configured cap."""


class CapExceeded(AtlirError):
    """A generator parameter exceeds its configured size cap."""


class DocumentError(AtlirError):
    """A model document cannot be parsed; carries a location hint."""

    def __init__(self, message, where=None):
        if where is not None:
            message = "%s (%s)" % (message, where)
        super().__init__(message)
        self.where = where


class PreconditionViolation(AtlirError):
    """An internal checker invariant was violated; indicates a checker bug."""
