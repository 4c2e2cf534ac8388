# component_id: errors
# kind: runtime_module
# area: api
# status: stable
# version: 0.1.0
# license: Apache-2.0
# purpose: Exception hierarchy shared by every MHS package.

from __future__ import annotations

from typing import Optional, Sequence, Tuple


class MhsError(Exception):
    """Base class for all errors raised by :mod:`mhs_scan`."""


class DimensionError(MhsError, ValueError):
    """Shapes are incompatible for the requested operation."""

    def __init__(self, message: str, *shapes: Tuple[int, ...]) -> None:
        if shapes:
            rendered = ", ".join(str(tuple(s)) for s in shapes)
            message = f"{message} (shapes: {rendered})"
        super().__init__(message)
        self.shapes = tuple(tuple(s) for s in shapes)


class DomainError(MhsError, ValueError):
    """A value lies outside the mathematical domain of an operation."""


class ContractError(MhsError, RuntimeError):
    """An operation was called outside the conditions under which it is defined."""


class FormatError(MhsError, ValueError):
    """A weights container is malformed.

    ``offset`` is the byte position at which decoding failed.
    """

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class ConfigValidationError(MhsError, ValueError):
    """A configuration (or a weights manifest checked against one) is invalid.

    ``errors`` holds one human-readable message per offending key.
    """

    def __init__(self, errors: Sequence[str], *, source: Optional[str] = None) -> None:
        self.errors = list(errors)
        self.source = source
        head = f"invalid configuration{f' in {source}' if source else ''}"
        super().__init__(head + ": " + "; ".join(self.errors))


class InconclusiveCheck(MhsError):
    """A gradient check could not find a regular (tie-free) evaluation point."""


__all__ = [
    "MhsError",
    "DimensionError",
    "DomainError",
    "ContractError",
    "FormatError",
    "ConfigValidationError",
    "InconclusiveCheck",
]
