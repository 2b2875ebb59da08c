"""
Walk-forward VaR backtest of an equally weighted portfolio.

On every test day t a forecaster sees the log returns of rows [0, t) and
produces one VaR per level for the portfolio's simple return on day t.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from django.conf import settings

from benchmarks.garch import garch_forecast_stack
from benchmarks.historical import historical_var
from evaluation.exceptions import BacktestError
from evaluation.scores import nll_scores, portfolio_nll, rlf, var_from_samples
from market.returns import nonlog_transform, portfolio_returns

logger = logging.getLogger(__name__)


def level_label(level):
    return f"{round(level * 100):d}"


def day_rng(seed, day):
    return np.random.default_rng([seed, day])


class Forecaster:
    """Base class; `warmup` is the number of history rows a forecast needs."""

    name = "forecaster"
    warmup = 1

    def var(self, history, levels, rng):
        raise NotImplementedError


class SamplingForecaster(Forecaster):
    """
    VaR from Monte-Carlo portfolio returns.

    Subclasses implement `sample_returns(history, n, rng)` returning (n, d)
    simulated simple returns; the portfolio return of each draw is the
    mean across assets.
    """

    def __init__(self, n_samples=None):
        self.n_samples = settings.VAR_SAMPLES if n_samples is None else n_samples

    def sample_returns(self, history, n, rng):
        raise NotImplementedError

    def portfolio_samples(self, history, rng):
        return np.asarray(self.sample_returns(history, self.n_samples, rng)).mean(axis=-1)

    def var(self, history, levels, rng):
        samples = self.portfolio_samples(history, rng)
        return [var_from_samples(samples, level, expected=self.n_samples) for level in levels]


class FunctionForecaster(SamplingForecaster):
    """Wraps `sampler(history, n, rng) -> (n, d)` simple returns."""

    name = "sampler"

    def __init__(self, sampler, n_samples=None, warmup=0, name=None):
        super().__init__(n_samples)
        self.sampler = sampler
        self.warmup = warmup
        if name:
            self.name = name

    def sample_returns(self, history, n, rng):
        samples = np.asarray(self.sampler(history, n, rng), dtype=np.float64)
        return samples[:, None] if samples.ndim == 1 else samples


class TempVaeForecaster(SamplingForecaster):
    """Next-day draws from the model, mapped back to simple returns."""

    name = "tempvae"

    def __init__(self, model, windows, n_samples=None):
        super().__init__(n_samples)
        self.model = model
        self.windows = windows
        self.warmup = model.config.window - 1

    def sample_returns(self, history, n, rng):
        recent = self.windows.standardize(history[-self.warmup:])
        draws = self.model.forecast_next(recent, n, rng)
        return nonlog_transform(self.windows.destandardize(draws))


class GarchForecaster(SamplingForecaster):
    """Independent per-asset GARCH(1,1) forecasts sampled jointly."""

    name = "garch"

    def __init__(self, params_list, initials=None, n_samples=None):
        super().__init__(n_samples)
        self.params_list = list(params_list)
        self.initials = initials

    def sample_returns(self, history, n, rng):
        forecast = garch_forecast_stack(self.params_list, history, self.initials)
        return nonlog_transform(forecast.sample(rng, sample_shape=(n,)).data)


class HistoricalForecaster(Forecaster):
    """Order statistics of the trailing window of realized portfolio returns."""

    name = "hs"

    def __init__(self, window=None):
        self.warmup = settings.HS_WINDOW if window is None else window

    def var(self, history, levels, rng):
        trailing = portfolio_returns(history[-self.warmup:])
        return [historical_var(trailing, level) for level in levels]


@dataclass
class BacktestReport:
    estimator: str
    levels: tuple
    days: pd.DataFrame
    skipped: int = 0
    warmup: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def effective_days(self):
        return len(self.days)

    def breaches(self, level):
        return int(self.days[f"breach{level_label(level)}"].sum())

    def breaches_per_100(self, level):
        return 100.0 * self.breaches(level) / self.effective_days

    def mean_rlf(self, level):
        return float(self.days[f"rlf{level_label(level)}"].mean())

    def summary(self):
        row = {
            "estimator": self.estimator,
            "effective_days": self.effective_days,
            "skipped_days": self.skipped,
            "warmup": self.warmup,
        }
        for level in self.levels:
            row[f"RLF{level_label(level)}"] = self.mean_rlf(level)
        for level in self.levels:
            row[f"Br{level_label(level)}"] = self.breaches_per_100(level)
        row.update(self.extra)
        return row

    def write_csv(self, days_path, summary_path):
        self.days.to_csv(days_path, index=False, float_format=settings.CSV_FLOAT_FORMAT)
        pd.DataFrame([self.summary()]).to_csv(
            summary_path, index=False, float_format=settings.CSV_FLOAT_FORMAT
        )

    def plot_svg(self, path):
        import matplotlib

        matplotlib.use("Agg")
        from matplotlib import pyplot as plt

        fig, ax = plt.subplots(figsize=(10, 4))
        x = np.arange(self.effective_days)
        ax.plot(x, self.days["realized"], color="0.5", linewidth=0.6, label="realized")
        for level in self.levels:
            label = level_label(level)
            ax.plot(x, self.days[f"var{label}"], linewidth=1.0, label=f"VaR{label}")
            breached = self.days[f"breach{label}"].to_numpy(dtype=bool)
            ax.scatter(x[breached], self.days["realized"][breached], s=6)
        ax.set_title(f"{self.estimator} VaR backtest")
        ax.set_xlabel("test day")
        ax.legend(loc="lower left")
        fig.tight_layout()
        fig.savefig(path, format="svg")
        plt.close(fig)


def backtest(forecaster, returns, start, levels=None, seed=0, dates=None):
    """
    Forecast VaR for every day t in [start, T) of the log-return matrix
    `returns` and score it against the realized portfolio return. Days with
    fewer than `forecaster.warmup` history rows are skipped.
    """
    levels = tuple(settings.VAR_LEVELS if levels is None else levels)
    returns = np.asarray(returns, dtype=np.float64)
    if returns.ndim == 1:
        returns = returns[:, None]
    if not 0 <= start < len(returns):
        raise BacktestError(f"test start {start} is outside the {len(returns)} return rows")
    realized = portfolio_returns(returns)
    rows = []
    skipped = 0
    for t in range(start, len(returns)):
        if t < forecaster.warmup:
            skipped += 1
            continue
        estimates = forecaster.var(returns[:t], levels, day_rng(seed, t))
        row = {"day": t, "date": dates[t] if dates is not None else t, "realized": realized[t]}
        for level, estimate in zip(levels, estimates):
            label = level_label(level)
            row[f"var{label}"] = estimate
            row[f"breach{label}"] = int(realized[t] < estimate)
            row[f"rlf{label}"] = rlf(estimate, realized[t])
        rows.append(row)
    if skipped:
        logger.warning(
            "%s: skipped %d test days with fewer than %d history rows",
            forecaster.name, skipped, forecaster.warmup,
        )
    if not rows:
        raise BacktestError(f"{forecaster.name} had no test day with {forecaster.warmup} rows of history")
    report = BacktestReport(forecaster.name, levels, pd.DataFrame(rows), skipped, forecaster.warmup)
    logger.info(
        "%s backtest over %d days: %s", forecaster.name, report.effective_days,
        ", ".join(f"Br{level_label(level)}={report.breaches_per_100(level):.2f}" for level in levels),
    )
    return report


def score_forecasts(forecaster, returns, start, seed=0, diagonal_only=False, dates=None):
    """
    Per-day full, diagonal and portfolio NLL of a sampling forecaster's
    simple-return draws against the realized simple returns.
    """
    if not isinstance(forecaster, SamplingForecaster):
        raise BacktestError(f"{forecaster.name} does not produce samples to score")
    returns = np.asarray(returns, dtype=np.float64)
    realized = nonlog_transform(returns)
    rows = []
    for t in range(max(start, forecaster.warmup), len(returns)):
        samples = forecaster.sample_returns(returns[:t], forecaster.n_samples, day_rng(seed, t))
        full, diagonal = nll_scores(samples, realized[t], diagonal_only=diagonal_only)
        rows.append({
            "day": t,
            "date": dates[t] if dates is not None else t,
            "nll": np.nan if full is None else full,
            "nll_diag": diagonal,
            "nll_portfolio": portfolio_nll(samples, realized[t].mean()),
        })
    if not rows:
        raise BacktestError(f"no test day to score for {forecaster.name}")
    return pd.DataFrame(rows)
