"""Exception hierarchy.

Errors are split in two families so the CLI can map them to exit codes:
``ConfigError`` for bad user configuration, ``DataError`` for anything the
data itself makes impossible.
"""


class AuditError(Exception):
    """Base class for all errors raised by synthaudit."""


class ConfigError(AuditError):
    pass


class DataError(AuditError, ValueError):
    pass


class SchemaMismatch(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} does not match the schema")


class ParseError(DataError):
    def __init__(self, row, column, token=None):
        self.row = row
        self.column = column
        self.token = token
        super().__init__(f"cannot parse {token!r} at row {row}, column {column!r}")


class MissingTarget(DataError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"target is missing at row {row}")


class AllMissingColumn(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"numeric column {column!r} has no observed value")


class NotNumeric(DataError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column!r} is not numeric")


class NonBinaryTarget(DataError):
    pass


class DegenerateTarget(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class ZeroVector(DataError):
    pass


class InvalidSigma(DataError):
    pass


class DegenerateSample(DataError):
    pass


class AssumptionsNotMet(DataError):
    pass


class TooFewFeatures(DataError):
    pass


class EmptySelection(DataError):
    pass


class DegenerateData(DataError):
    pass


class SensitiveNotFound(DataError):
    pass


class EmptyPublicSet(DataError):
    pass


class TooFewRows(DataError):
    pass
