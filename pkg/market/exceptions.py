class DataError(ValueError):
    """Invalid or unusable market data."""


class CsvFormatError(DataError):
    def __init__(self, message, line=None, column=None):
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column!r}"
            location += ": "
        super().__init__(location + message)
        self.line = line
        self.column = column


class NonPositivePriceError(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"non-positive price {value!r} at row {row}, column {column!r}")
        self.row = row
        self.column = column
        self.value = value
