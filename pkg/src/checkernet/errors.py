"""Exception hierarchy.

Precondition failures carry the offending residual so callers (and the CLI,
which maps them to exit code 2) can report how badly the input missed.
"""

from __future__ import annotations


class CheckernetError(Exception):
    """Base class for all package errors."""


class GridTooSmallError(CheckernetError):
    """The net has too few rows/columns for the requested operation."""


class DegenerateGeometryError(CheckernetError):
    """Coincident vertices, zero cross products, collinear one-rings, etc."""


class InconsistentCheckerboardError(CheckernetError):
    """Reflection paths through checkerboard vertices disagree."""

    def __init__(self, message: str, max_disagreement: float):
        super().__init__(message)
        self.max_disagreement = max_disagreement


class PreconditionError(CheckernetError):
    """An operation's geometric precondition failed; exit code 2 in the CLI."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class NonOrthogonalPatternError(PreconditionError):
    pass


class NonConjugatePatternError(PreconditionError):
    pass


class NonKoenigsPatternError(PreconditionError):
    pass


class NotOnUnitSphereError(PreconditionError):
    pass


class NotIsothermicError(PreconditionError):
    pass


class TransformDegeneracyError(PreconditionError):
    """A transformed congruence member is a plane or the point at infinity,
    so the image control net has no vertex there."""


class QnetFormatError(CheckernetError):
    """Base class for qnet file format errors; exit code 1 in the CLI."""


class MalformedHeaderError(QnetFormatError):
    pass


class CountMismatchError(QnetFormatError):
    pass


class NonFiniteValueError(QnetFormatError):
    pass
