class SsmdpError(Exception):
    """Base class for every error raised by the toolkit."""


class InvalidArgumentError(SsmdpError, ValueError):
    """An argument violates an operation's precondition (shape, range, step order)."""


class InconsistencyError(SsmdpError):
    """Two inputs disagree with each other, e.g. a history naming items outside the catalog."""
