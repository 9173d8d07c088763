"""Exception hierarchy shared by the whole package.

Estimation-level failures (bad data, impossible preconditions) derive from
DataError so the CLI can map them to exit code 1; everything else is a bug
and surfaces as exit code 2.
"""

from __future__ import annotations


class DperError(Exception):
    """Base class for all package errors."""


class DataError(DperError):
    """Input data violates a precondition of the requested operation."""


class NoObservedData(DataError):
    """A feature (optionally within a class) has no observed entries."""

    def __init__(self, feature: int, class_id: int | None = None):
        self.feature = feature
        self.class_id = class_id
        where = f"feature {feature}"
        if class_id is not None:
            where += f" in class {class_id}"
        super().__init__(f"no observed entries for {where}")


class DomainError(DperError):
    """Argument lies outside the open interval where the objective is defined."""


class DegenerateObjective(DperError):
    """Every polynomial coefficient is zero: the objective carries no
    information about the covariance entry."""


class InsufficientCompleteRows(DataError):
    """Listwise deletion left fewer than two complete rows in some class."""

    def __init__(self, surviving: dict[int, int]):
        self.surviving = surviving
        super().__init__(f"too few complete rows after listwise deletion: {surviving}")


class MaskInfeasible(DataError):
    """Masking could not keep at least one observed entry per class/feature."""

    def __init__(self, feature: int, class_id: int | None = None):
        self.feature = feature
        self.class_id = class_id
        super().__init__(
            f"could not keep an observed entry for feature {feature}"
            + (f" in class {class_id}" if class_id is not None else "")
        )


class ShapeMismatch(DataError):
    """Truth and estimate shapes disagree."""


class ParseError(DataError):
    """A CSV cell failed to parse."""

    def __init__(self, line: int, column: int, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        super().__init__(f"line {line}, column {column}: {reason}")


class MissingLabel(DataError):
    """A row has no class label; labels must be complete."""

    def __init__(self, line: int):
        self.line = line
        super().__init__(f"line {line}: missing class label")
