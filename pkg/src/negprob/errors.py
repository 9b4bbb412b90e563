"""Exception hierarchy shared by every module."""


class NegProbError(Exception):
    """Base class for all package errors."""


class InputError(NegProbError, ValueError):
    """Malformed input: unknown atom, unknown variable, bad argument."""


class ScenarioError(InputError):
    """A scenario document failed validation.

    ``path`` points into the offending document, e.g. ``contexts[2].table.probs``.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DomainError(NegProbError, ValueError):
    """An operation was applied outside its mathematical domain."""


class SignalingError(NegProbError):
    """Two contexts disagree on the probability of a shared event."""


class SolverError(NegProbError):
    """The simplex solver failed to terminate or lost numerical control."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
