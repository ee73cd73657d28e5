"""Exception types shared across the package."""


class ForestAlgError(Exception):
    """Base class for package-specific errors."""


class BadTarget(ForestAlgError):
    """An update names a node that does not exist or cannot take that update."""


class EmptyTree(ForestAlgError):
    """An operation needs a nonempty tree."""


class KindMismatch(TypeError, ForestAlgError):
    """An algebra operation was given operands of the wrong sorts."""


class NoRotation(ForestAlgError):
    """do_rotation was called at a node where no rotation applies."""


class UnknownSymbol(ForestAlgError, KeyError):
    """A label is not in the automaton's alphabet."""


class TooLarge(ForestAlgError):
    """An oracle was asked to do exhaustive work beyond its configured caps."""


class StaleSession(ForestAlgError):
    """An enumeration session was used after its underlying structure changed."""


class ParseError(ForestAlgError, ValueError):
    """An input file does not conform to its text format."""
