"""Exception types shared across the package."""

from __future__ import annotations


class TkbAlignError(Exception):
    """Base class for errors raised by this package."""


class UnsupportedQueryShape(TkbAlignError):
    """A query falls outside the fragment the reasoner decides."""


class NotTreeShaped(UnsupportedQueryShape):
    """A CQ cannot be rolled up into an ALC concept."""


class UnsatisfiableTBox(TkbAlignError):
    pass


class InconsistentKB(TkbAlignError):
    pass


class InconsistentIntermediate(TkbAlignError):
    """A modification produced an ABox that is inconsistent with the TBox."""


class NonDistinctWitnesses(TkbAlignError):
    pass


class BoundTooLarge(TkbAlignError):
    """A brute-force enumeration would exceed its size guard."""


class UnknownLetter(TkbAlignError, KeyError):
    pass


class QuerySyntaxError(TkbAlignError):
    """Parse error carrying a 1-based line and column."""

    def __init__(self, message: str, line: int, col: int, expected: str = ""):
        self.line = line
        self.col = col
        self.expected = expected
        detail = f" (expected {expected})" if expected else ""
        super().__init__(f"line {line}, column {col}: {message}{detail}")
