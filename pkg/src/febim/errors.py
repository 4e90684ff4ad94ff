"""Exception hierarchy shared by all modules."""


class FebimError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(FebimError):
    """Bad user input: missing files, malformed tables, invalid options."""


class DataError(FebimError):
    """Problem with dataset content or model state discovered while computing."""


class MissingColumn(DataError):
    pass


class ParseError(DataError):
    def __init__(self, row, col, value, path=None):
        self.row = row
        self.col = col
        self.value = value
        where = f"{path}: " if path else ""
        super().__init__(f"{where}row {row}, column {col!r}: cannot parse {value!r} as a number")


class EmptyDataset(DataError):
    pass


class InfeasibleSplit(DataError):
    pass


class EmptyClass(DataError):
    pass


class NonPositiveVariance(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class AllZeroColumn(DataError):
    pass


class BinOutOfRange(DataError):
    pass


class MalformedTable(ConfigError):
    pass


class SchemaError(ConfigError):
    """A JSON artifact does not conform to its schema."""
