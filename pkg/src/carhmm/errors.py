"""Exception types shared across the package.

Every rejection of user input carries enough context (usually a row number)
to locate the offending record; nothing is dropped or reordered silently.
"""


class CarHmmError(Exception):
    """Base class for all package errors."""


class TrackFormatError(CarHmmError):
    """Base for track ingestion failures that name a data row."""

    def __init__(self, message, row=None):
        self.row = row
        if row is not None:
            message = f"{message} (data row {row})"
        super().__init__(message)


class MissingColumn(CarHmmError):
    pass


class UnparsableRow(TrackFormatError):
    pass


class NonMonotonicTime(TrackFormatError):
    pass


class OutOfRangeCoordinate(TrackFormatError):
    pass


class AntimeridianCrossing(TrackFormatError):
    pass


class CoincidentPoints(CarHmmError):
    pass


class DegenerateGroup(CarHmmError):
    pass


class AllGroupsDegenerate(CarHmmError):
    pass


class DomainError(CarHmmError):
    pass


class InvalidModel(CarHmmError):
    pass


class ReducibleChain(CarHmmError):
    pass


class AbsorbingState(CarHmmError):
    pass


class NumericUnderflow(CarHmmError):
    pass


class NonFinite(CarHmmError):
    pass


class NonFiniteObjective(CarHmmError):
    pass


class OptimizerFailure(CarHmmError):
    pass


class AllRestartsFailed(CarHmmError):
    pass


class LengthMismatch(CarHmmError):
    pass


class DegenerateSeries(CarHmmError):
    pass


class TooShort(CarHmmError):
    pass


class IoError(CarHmmError):
    pass
