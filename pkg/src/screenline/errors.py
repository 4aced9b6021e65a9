"""Exception hierarchy shared across the package.

Module-specific errors subclass ScreenlineError so callers (CLI, HTTP
service) can map the whole family to exit codes / status codes in one
place.  File-format errors live here because both the gallery index file
and the detection stream raise the same kinds.
"""

from __future__ import annotations


class ScreenlineError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(ScreenlineError):
    """A domain value violates one of its invariants."""


class OutOfRange(ValidationError):
    pass


class BadBBox(ValidationError):
    pass


class NegativeScore(ValidationError):
    pass


class DuplicateKey(ValidationError):
    pass


# --- file formats -----------------------------------------------------------


class FileFormatError(ScreenlineError):
    """A persisted artifact cannot be read back."""


class BadMagic(FileFormatError):
    pass


class VersionUnsupported(FileFormatError):
    pass


class TruncatedFile(FileFormatError):
    pass


class ChecksumMismatch(FileFormatError):
    pass
