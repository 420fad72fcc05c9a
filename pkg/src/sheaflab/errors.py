"""Exception hierarchy.

Every error raised by the library derives from :class:`SheafError`.  The two
intermediate classes split errors the way the CLI reports them:
:class:`InputError` means the input itself is malformed (exit code 1) and
:class:`InconsistencyError` means a well-formed input failed a mathematical
consistency check (exit code 2).
"""

from __future__ import annotations


class SheafError(Exception):
    """Base class for all sheaflab errors."""


class InputError(SheafError):
    """Malformed or unusable input."""


class InconsistencyError(SheafError):
    """Well-formed data that violates a consistency requirement."""


# complexes

class DuplicateId(InputError):
    pass


class DuplicateRelation(DuplicateId):
    pass


class DanglingRelation(InputError):
    pass


class CycleDetected(InputError):
    pass


class RankViolation(InputError):
    pass


class UnknownEndpoint(InputError):
    pass


class DuplicateEdgeId(DuplicateId):
    pass


class UnknownCell(InputError):
    pass


class UnknownRelation(UnknownCell):
    pass


# sheaves

class MissingStalk(InputError):
    pass


class MissingMap(InputError):
    pass


class ShapeMismatch(InputError):
    pass


class IncomparableCells(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NonFiniteEntry(InputError):
    pass


class UnsupportedShape(InputError):
    pass


class MissingCellValue(InputError):
    pass


class InconsistentAssignment(InconsistencyError):
    def __init__(self, cell: str, residual: float, message: str | None = None):
        self.cell = cell
        self.residual = residual
        super().__init__(message or f"assignment is inconsistent at {cell!r} (residual {residual:.12g})")


# interval model

class EmptyCover(InputError):
    pass


class DegenerateGrid(InputError):
    pass


class InvalidCover(InputError):
    pass


class GlueConflict(InconsistencyError):
    def __init__(self, grid_index: int, point: float, values: tuple[float, ...], difference: float):
        self.grid_index = grid_index
        self.point = point
        self.values = values
        self.difference = difference
        super().__init__(
            f"local data disagree at grid point {point:.12g} (index {grid_index}): "
            f"difference {difference:.12g}"
        )


# documents

class DocumentError(InputError):
    """Problem with a sheaf document; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class DocumentSyntaxError(DocumentError):
    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class UnknownField(DocumentError):
    pass


class MissingField(DocumentError):
    pass


class BadMatrixShape(DocumentError):
    pass
