"""Exception hierarchy shared across the toolkit.

``DataError`` subclasses signal problems in user-supplied data or tables;
the CLI maps them to exit code 1. ``ConfigError`` signals a broken
configuration or startup environment and maps to exit code 2.
"""

from __future__ import annotations


class DataError(Exception):
    """Base class for errors caused by the data being processed."""


class EncodingError(DataError):
    """Input file is not valid UTF-8."""


class SchemaError(DataError):
    """CSV header is missing required columns."""


class UnknownFieldError(DataError):
    """A field name outside the supported set was requested."""


class AmbiguousKeyError(DataError):
    """A lexicon key maps to more than one canonical spelling."""


class MissingComponentError(DataError):
    """A record lacks a component required for its composite match key."""

    def __init__(self, field: str):
        super().__init__(f"missing component: {field}")
        self.field = field


class InsufficientDataError(DataError):
    """A provider category has no entries to draw from."""


class UnmappedCodepointError(DataError):
    """Transliteration hit a codepoint no rule covers."""

    def __init__(self, codepoint: str, offset: int):
        super().__init__(
            f"no transliteration rule for U+{ord(codepoint):04X} at offset {offset}"
        )
        self.codepoint = codepoint
        self.offset = offset


class ConfigError(Exception):
    """Configuration file is missing, unreadable or inconsistent."""
