"""
Price and return CSV files.

Layout: UTF-8, comma separated, header `date,ASSET1,...`, one row per
period in chronological order. Dates are opaque labels; they are compared
numerically when every label is a number and as strings otherwise.
"""
import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from django.conf import settings

from market.exceptions import CsvFormatError
from market.returns import log_returns


@dataclass
class PriceSeries:
    dates: list
    assets: list
    prices: np.ndarray

    def __post_init__(self):
        self.prices = np.asarray(self.prices, dtype=np.float64)

    @property
    def shape(self):
        return self.prices.shape

    def log_returns(self):
        return ReturnSeries(self.dates[1:], self.assets, log_returns(self.prices, self.assets))


@dataclass
class ReturnSeries:
    dates: list
    assets: list
    returns: np.ndarray

    def __post_init__(self):
        self.returns = np.asarray(self.returns, dtype=np.float64)

    @property
    def shape(self):
        return self.returns.shape


def _date_keys(dates):
    numeric = pd.to_numeric(pd.Series(dates, dtype=object), errors="coerce")
    if numeric.notna().all():
        return numeric.tolist()
    return list(dates)


def _decode(path):
    raw = Path(path).read_bytes()
    try:
        return raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        line = raw[:exc.start].count(b"\n") + 1
        raise CsvFormatError("file is not valid UTF-8", line=line) from exc


def _split_rows(text):
    """Header fields, data rows and the file line of every row; blank lines are skipped."""
    reader = csv.reader(io.StringIO(text, newline=""), skipinitialspace=True)
    rows, lines = [], []
    try:
        header = next(reader, None)
        if header is None:
            raise CsvFormatError("file is empty")
        for fields in reader:
            if not fields:
                continue
            if len(fields) != len(header):
                raise CsvFormatError(
                    f"ragged row: {len(fields)} fields but the header has {len(header)}",
                    line=reader.line_num,
                )
            rows.append(fields)
            lines.append(reader.line_num)
    except csv.Error as exc:
        raise CsvFormatError(str(exc), line=reader.line_num) from exc
    return [name.strip() for name in header], rows, lines


def _read_table(path, positive):
    header, rows, lines = _split_rows(_decode(path))
    if len(header) < 2:
        raise CsvFormatError("need a date column and at least one asset column", line=1)
    assets = header[1:]
    for position, name in enumerate(assets):
        if not name:
            raise CsvFormatError(f"asset column {position + 2} has no name", line=1)
        if name in assets[:position]:
            raise CsvFormatError("duplicate asset column", line=1, column=name)
    if not rows:
        raise CsvFormatError("no data rows", line=2)
    frame = pd.DataFrame(rows, columns=header, dtype=str)
    dates = frame.iloc[:, 0].str.strip().tolist()

    values = np.empty((len(frame), len(assets)))
    for position, name in enumerate(assets):
        cells = frame.iloc[:, position + 1].str.strip()
        numbers = pd.to_numeric(cells, errors="coerce")
        bad = (cells == "") | numbers.isna() | ~np.isfinite(numbers.fillna(0.0))
        if positive:
            bad |= numbers.fillna(0.0) <= 0
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            cell = cells.iloc[row]
            problem = "missing value" if cell == "" else f"invalid value {cell!r}"
            if positive and cell and not numbers.isna().iloc[row]:
                problem = f"non-positive price {cell!r}"
            raise CsvFormatError(problem, line=lines[row], column=name)
        values[:, position] = numbers.to_numpy(dtype=np.float64)

    keys = _date_keys(dates)
    for row in range(1, len(keys)):
        if not keys[row] > keys[row - 1]:
            raise CsvFormatError(
                f"date {dates[row]!r} does not follow {dates[row - 1]!r}",
                line=lines[row],
                column=header[0],
            )
    return dates, assets, values


def load_prices_csv(path):
    return PriceSeries(*_read_table(path, positive=True))


def load_returns_csv(path):
    return ReturnSeries(*_read_table(path, positive=False))


def write_table(path, dates, assets, values, date_label="date"):
    frame = pd.DataFrame(np.asarray(values, dtype=np.float64), columns=list(assets))
    frame.insert(0, date_label, list(dates))
    frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT)


def write_prices_csv(path, series):
    write_table(path, series.dates, series.assets, series.prices)


def write_returns_csv(path, series):
    write_table(path, series.dates, series.assets, series.returns)


def default_labels(count, start=1):
    return [str(index) for index in range(start, start + count)]


def default_assets(d):
    return [f"ASSET{index}" for index in range(1, d + 1)]
