import numpy as np

MIN_WINDOW = 20


def order_statistic_rank(count, level):
    """k = round(count * (1 - level)), at least 1."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    return max(1, int(round(count * (1.0 - level))))


def order_statistic(values, level):
    """k-th smallest of `values` for k = order_statistic_rank(len(values), level)."""
    values = np.sort(np.asarray(values, dtype=np.float64).ravel())
    return float(values[order_statistic_rank(len(values), level) - 1])


def historical_var(window, level):
    """VaR at `level` as an order statistic of the trailing returns in `window`."""
    window = np.asarray(window, dtype=np.float64).ravel()
    if len(window) < MIN_WINDOW:
        raise ValueError(f"historical VaR needs at least {MIN_WINDOW} returns, got {len(window)}")
    return order_statistic(window, level)
