"""Exception hierarchy.

Every error raised deliberately by the library derives from :class:`GCMSError`.
The command-line front end maps these to exit code 2 (precondition errors).
"""

from __future__ import annotations


class GCMSError(Exception):
    """Base class for precondition and domain errors."""

    def to_dict(self) -> dict:
        return {"type": type(self).__name__, "message": str(self)}


class PreconditionError(GCMSError):
    """An operation was called outside its documented domain."""


class ParseError(GCMSError):
    """Malformed text input. Carries a 1-based line and column."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

    def to_dict(self) -> dict:
        d = super().to_dict()
        d.update(line=self.line, column=self.column)
        return d


class UnknownSubcommand(GCMSError):
    pass


class HorizonTooSmall(GCMSError):
    pass


class UnsupportedRoot(GCMSError):
    pass


class DepthExceeded(GCMSError):
    pass


class EnumerationTooLarge(GCMSError):
    pass


class EmptyStem(GCMSError):
    pass


class StemTooShort(GCMSError):
    pass


class BetaBelowCritical(GCMSError):
    pass


class AlphabetTooSmall(GCMSError):
    pass


class NotExtendableError(GCMSError):
    pass


class NonNormalForm(GCMSError):
    pass


class UnsupportedTerm(GCMSError):
    pass
