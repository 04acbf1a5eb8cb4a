"""Exception hierarchy shared across the package."""


class BMatchingError(Exception):
    """Base class for all errors raised by this package."""


class TopologyError(BMatchingError, ValueError):
    pass


class Disconnected(TopologyError):
    pass


class NonPositiveLength(TopologyError):
    pass


class SelfLoop(TopologyError):
    pass


class DuplicateEdge(TopologyError):
    pass


class BadNodeId(BMatchingError, ValueError):
    pass


class TopologyTooLarge(TopologyError):
    pass


class AlreadyMatched(BMatchingError, ValueError):
    pass


class DegreeCapViolation(BMatchingError, ValueError):
    pass


class NotMatched(BMatchingError, KeyError):
    pass


class InvariantViolation(BMatchingError, AssertionError):
    """Internal self-check failed; signals a bug, never bad input."""


class StateSpaceTooLarge(BMatchingError, RuntimeError):
    pass


class MalformedChunkTrace(BMatchingError, ValueError):
    pass


class ParseError(BMatchingError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SelfPair(ParseError):
    pass


class DegenerateMatrix(BMatchingError, ValueError):
    pass


class IncompatibleConfigs(BMatchingError, ValueError):
    pass
