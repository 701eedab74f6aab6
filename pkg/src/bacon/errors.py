"""Exception types shared across the toolkit."""

from __future__ import annotations

import enum


class BaconError(Exception):
    """Base class for all toolkit errors."""


class UnbalancedMarkerError(BaconError):
    """An opening ``<`` marker has no matching ``>`` (or vice versa)."""


class ParseErrorKind(enum.Enum):
    MISSING_SECTION = "MissingSection"
    BAD_OBJECT_LINE = "BadObjectLine"
    BAD_RELATION_LINE = "BadRelationLine"
    RESERVED_CHAR_IN_TEXT = "ReservedCharInText"
    DUPLICATE_NAME = "DuplicateName"
    UNKNOWN_SUBTITLE = "UnknownSubtitle"
    UNBALANCED_MARKER = "UnbalancedMarker"


class ParseError(BaconError):
    """Fail-fast parse failure with a 1-based line number into the input."""

    def __init__(self, kind: ParseErrorKind, line: int, detail: str):
        self.kind = kind
        self.line = line
        self.detail = detail
        super().__init__(f"{kind.value} at line {line}: {detail}")


class SchemaError(BaconError):
    """JSON input violates the caption schema; ``path`` is a JSON pointer."""

    def __init__(self, path: str, detail: str):
        self.path = path
        self.detail = detail
        super().__init__(f"{path}: {detail}")


class ReservedCharError(BaconError):
    """A free-text field contains a reserved grammar character."""

    def __init__(self, field: str, char: str):
        self.field = field
        self.char = char
        super().__init__(f"reserved character {char!r} in {field}")


class UnknownSlotError(BaconError):
    """An instruction-prompt example references an undeclared template slot."""


class BackendUnavailableError(BaconError):
    """A model provider could not serve the request."""


class DimensionMismatchError(BaconError):
    """Two masks (or embedding vectors) have incompatible dimensions."""


class EmptyMaskError(BaconError):
    """Operation requires at least one foreground pixel."""


class NoGroundedObjectsError(BaconError):
    """Region selection requires at least one object with a box."""


class ModeUnavailableError(BaconError):
    """The requested evaluation mode lacks the data it needs."""
