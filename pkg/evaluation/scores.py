"""
Forecast scores computed from Monte-Carlo samples.

NLL scores plug the empirical mean and covariance of the samples into a
Gaussian density; VaR is an order statistic of simulated portfolio returns.
"""
from typing import NamedTuple, Optional

import numpy as np
from django.conf import settings
from scipy import stats

from benchmarks.historical import order_statistic
from evaluation.exceptions import SingularCovarianceError


class NllScores(NamedTuple):
    full: Optional[float]
    diagonal: float


def _as_samples(samples, realized):
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 1:
        samples = samples[:, None]
    realized = np.atleast_1d(np.asarray(realized, dtype=np.float64))
    if samples.ndim != 2 or realized.shape != (samples.shape[1],):
        raise ValueError(f"samples {samples.shape} do not match realized returns {realized.shape}")
    return samples, realized


def nll_scores(samples, realized, diagonal_only=False):
    """
    Full and diagonal Gaussian NLL of `realized` (d,) under the empirical
    moments of `samples` (n, d). The full score needs n >= d + 2 and a
    nonsingular covariance; `diagonal_only` skips it.
    """
    samples, realized = _as_samples(samples, realized)
    n, d = samples.shape
    mean = samples.mean(axis=0)
    variances = samples.var(axis=0, ddof=1) if n > 1 else np.zeros(d)
    if np.any(variances <= 0):
        raise SingularCovarianceError("samples have a zero-variance dimension")
    diagonal = -float(stats.norm.logpdf(realized, loc=mean, scale=np.sqrt(variances)).sum())
    if diagonal_only:
        return NllScores(None, diagonal)
    if n < d + 2:
        raise SingularCovarianceError(
            f"{n} samples cannot give a nonsingular {d}x{d} covariance; use the diagonal score"
        )
    covariance = np.atleast_2d(np.cov(samples, rowvar=False, ddof=1))
    try:
        full = -float(stats.multivariate_normal.logpdf(realized, mean=mean, cov=covariance))
    except (np.linalg.LinAlgError, ValueError) as error:
        raise SingularCovarianceError(f"{error}; use the diagonal score") from error
    return NllScores(full, diagonal)


def portfolio_nll(samples, realized):
    """Univariate NLL of the realized equal-weight portfolio return."""
    samples = np.asarray(samples, dtype=np.float64)
    portfolio = samples.mean(axis=1) if samples.ndim == 2 else samples
    if len(portfolio) < 3:
        raise ValueError(f"portfolio NLL needs at least 3 samples, got {len(portfolio)}")
    variance = portfolio.var(ddof=1)
    if variance <= 0:
        raise SingularCovarianceError("simulated portfolio returns have zero variance")
    return -float(stats.norm.logpdf(float(realized), loc=portfolio.mean(), scale=np.sqrt(variance)))


def var_from_samples(samples, level, expected=None, allow_other=False):
    """
    VaR at `level` as the k-th smallest simulated portfolio return with
    k = round(n (1 - level)); 1000 samples give k = 50 at 95% and 10 at 99%.
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    expected = settings.VAR_SAMPLES if expected is None else expected
    if len(samples) != expected and not allow_other:
        raise ValueError(f"expected {expected} samples for VaR, got {len(samples)}")
    return order_statistic(samples, level)


def rlf(var, realized):
    """Squared shortfall (VaR - r)^2 on breach days (r <= VaR), zero otherwise."""
    var = np.asarray(var, dtype=np.float64)
    realized = np.asarray(realized, dtype=np.float64)
    loss = np.where(realized <= var, (var - realized) ** 2, 0.0)
    return float(loss) if loss.ndim == 0 else loss
