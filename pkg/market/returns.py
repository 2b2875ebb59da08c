import logging
from dataclasses import dataclass

import numpy as np

from market.exceptions import DataError, NonPositivePriceError

logger = logging.getLogger(__name__)


def log_returns(prices, columns=None):
    """R[t] = ln S[t+1] - ln S[t]; rejects non-positive prices."""
    prices = np.asarray(prices, dtype=np.float64)
    if prices.ndim == 1:
        prices = prices[:, None]
    bad = np.argwhere(~(prices > 0))
    if len(bad):
        row, col = bad[0]
        column = columns[col] if columns is not None else int(col)
        raise NonPositivePriceError(int(row), column, float(prices[row, col]))
    return np.diff(np.log(prices), axis=0)


def nonlog_transform(r):
    """Simple returns exp(r) - 1."""
    return np.expm1(r)


def portfolio_returns(r_log):
    """Equally weighted portfolio of simple returns, one value per row."""
    return nonlog_transform(np.asarray(r_log, dtype=np.float64)).mean(axis=-1)


@dataclass
class WindowBatch:
    """
    Sliding windows over a standardized return series.

    Window i covers rows i..i+M-1; the first `n_train` windows form the
    training set and `mean`/`std` come from the rows they cover.
    """

    windows: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    n_train: int
    standardized: np.ndarray

    @property
    def window(self):
        return self.windows.shape[1]

    @property
    def train_windows(self):
        return self.windows[:self.n_train]

    @property
    def test_windows(self):
        return self.windows[self.n_train:]

    @property
    def train_rows(self):
        """Rows [0, train_rows) feed the standardization statistics."""
        return self.n_train + self.window - 1

    def __len__(self):
        return len(self.windows)

    def standardize(self, returns):
        return (np.asarray(returns) - self.mean) / self.std

    def destandardize(self, values):
        return np.asarray(values) * self.std + self.mean


def prepare_windows(returns, window=21, train_frac=0.66):
    returns = np.asarray(returns, dtype=np.float64)
    if returns.ndim != 2:
        raise DataError(f"returns must be a T x d matrix, got shape {returns.shape}")
    T = returns.shape[0]
    if T <= window:
        raise DataError(f"need more than {window} return rows for windows of length {window}, got {T}")
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")
    count = T - window
    n_train = int(round(train_frac * count))
    if n_train < 1:
        raise DataError(f"{count} windows leave no training window at train_frac={train_frac}")
    training = returns[:n_train + window - 1]
    mean = training.mean(axis=0)
    std = training.std(axis=0)
    flat = np.flatnonzero(std == 0)
    if len(flat):
        raise DataError(f"column {int(flat[0])} is constant over the training rows")
    standardized = (returns - mean) / std
    windows = np.lib.stride_tricks.sliding_window_view(standardized, window, axis=0)
    windows = np.ascontiguousarray(np.moveaxis(windows, -1, 1)[:count])
    logger.info("%d windows of length %d, %d for training", count, window, n_train)
    return WindowBatch(windows, mean, std, n_train, standardized)
