"""
Univariate GARCH(1,1) with a constant mean and Gaussian innovations.

    r_t = mu + e_t,  e_t ~ N(0, s2_t)
    s2_t = omega + alpha * e_{t-1}^2 + beta * s2_{t-1},  s2_1 = sample variance

Several assets are handled as independent univariate models.
"""
import logging
from dataclasses import asdict, dataclass

import numpy as np
import pandas as pd
from django.conf import settings
from scipy.optimize import minimize
from scipy.signal import lfilter
from scipy.special import softmax

from benchmarks.exceptions import GarchConvergenceError
from nncore.distributions import LOG_2PI, GaussianDiag

logger = logging.getLogger(__name__)

MIN_OBSERVATIONS = 50
# Softmax logits are confined to [-LOGIT_BOUND, LOGIT_BOUND].
LOGIT_BOUND = 15.0
STARTING_POINTS = ((0.05, 0.90), (0.10, 0.80), (0.20, 0.60), (0.05, 0.50))


@dataclass(frozen=True)
class GarchParams:
    mu: float
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError(f"alpha and beta must be non-negative, got {self.alpha}, {self.beta}")
        if self.alpha + self.beta >= 1:
            raise ValueError(f"alpha + beta must be below 1, got {self.alpha + self.beta}")

    @property
    def unconditional_variance(self):
        return self.omega / (1.0 - self.alpha - self.beta)


@dataclass
class GarchFit:
    params: GarchParams
    variances: np.ndarray
    loglik: float
    iterations: int

    def as_row(self):
        return {**asdict(self.params), "loglik": self.loglik}


def garch_variances(r, params, initial=None):
    """Conditional variances s2_1..s2_T for the series r."""
    r = np.asarray(r, dtype=np.float64)
    e2 = (r - params.mu) ** 2
    start = float(np.var(r)) if initial is None else float(initial)
    if len(r) == 1:
        return np.array([start])
    drive = params.omega + params.alpha * e2[:-1]
    rest, _ = lfilter([1.0], [1.0, -params.beta], drive, zi=[params.beta * start])
    return np.concatenate([[start], rest])


def garch_loglik(r, params, initial=None):
    r = np.asarray(r, dtype=np.float64)
    variances = garch_variances(r, params, initial)
    return float(-0.5 * np.sum(LOG_2PI + np.log(variances) + (r - params.mu) ** 2 / variances))


def _unpack(theta):
    mu, log_omega, b, c = theta
    alpha, beta, _ = softmax([b, c, 0.0])
    return GarchParams(mu=float(mu), omega=float(np.exp(log_omega)), alpha=float(alpha), beta=float(beta))


def _pack(mu, omega, alpha, beta):
    rest = 1.0 - alpha - beta
    return np.array([mu, np.log(omega), np.log(alpha / rest), np.log(beta / rest)])


def garch_fit(r, starting_points=STARTING_POINTS, max_iter=4000):
    """
    Gaussian maximum likelihood by Nelder-Mead on (mu, log omega, b, c) with
    (alpha, beta) the softmax shares of (b, c, 0), restarted from each of
    `starting_points` (alpha, beta pairs). Returns the best converged fit.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or len(r) < MIN_OBSERVATIONS:
        raise ValueError(f"garch_fit needs a series of at least {MIN_OBSERVATIONS} returns, got {r.shape}")
    mean, variance = float(r.mean()), float(r.var())
    if variance <= 0:
        raise ValueError("garch_fit needs a series with positive variance")

    def objective(theta):
        if np.any(np.abs(theta[2:]) > LOGIT_BOUND):
            return 1e300
        with np.errstate(over="ignore", divide="ignore", invalid="ignore", under="ignore"):
            try:
                value = -garch_loglik(r, _unpack(theta), initial=variance)
            except ValueError:
                return 1e300
        return value if np.isfinite(value) else 1e300

    best = None
    for number, (alpha, beta) in enumerate(starting_points):
        start = _pack(mean, variance * (1.0 - alpha - beta), alpha, beta)
        result = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options={"maxiter": max_iter, "maxfev": 2 * max_iter, "xatol": 1e-7, "fatol": 1e-8},
        )
        logger.debug("restart %d: success=%s loglik=%.6f", number, result.success, -result.fun)
        if best is None or result.fun < best.fun:
            best = result
    params = _unpack(best.x)
    if not best.success:
        raise GarchConvergenceError(
            f"GARCH fit did not converge: {best.message}", best=params, loglik=-best.fun
        )
    logger.info(
        "GARCH fit mu=%.4g omega=%.4g alpha=%.4f beta=%.4f loglik=%.4f",
        params.mu, params.omega, params.alpha, params.beta, -best.fun,
    )
    return GarchFit(params, garch_variances(r, params, variance), float(-best.fun), int(best.nit))


def next_variance(params, history, initial=None):
    history = np.asarray(history, dtype=np.float64)
    variances = garch_variances(history, params, initial)
    return params.omega + params.alpha * (history[-1] - params.mu) ** 2 + params.beta * variances[-1]


def garch_forecast(params, history, initial=None):
    """N(mu, s2_{T+1}) for the return after `history`."""
    variance = next_variance(params, history, initial)
    return GaussianDiag(np.array([params.mu]), np.array([np.sqrt(variance)]))


def garch_forecast_stack(params_list, history, initials=None):
    """Independent per-asset forecasts stacked into one diagonal Gaussian."""
    history = np.asarray(history, dtype=np.float64)
    if history.shape[1] != len(params_list):
        raise ValueError(f"{len(params_list)} parameter sets for {history.shape[1]} assets")
    initials = initials if initials is not None else [None] * len(params_list)
    variances = np.array([
        next_variance(params, history[:, column], initials[column])
        for column, params in enumerate(params_list)
    ])
    means = np.array([params.mu for params in params_list])
    return GaussianDiag(means, np.sqrt(variances))


def simulate_garch(params, T, rng, burn=500):
    """T returns from the model, started at the unconditional variance."""
    variance = params.unconditional_variance
    shocks = rng.standard_normal(T + burn)
    out = np.empty(T + burn)
    previous = 0.0
    for t in range(T + burn):
        if t:
            variance = params.omega + params.alpha * previous ** 2 + params.beta * variance
        previous = np.sqrt(variance) * shocks[t]
        out[t] = previous
    return params.mu + out[burn:]


def write_garch_params_csv(path, assets, fits):
    frame = pd.DataFrame([{"asset": asset, **fit.as_row()} for asset, fit in zip(assets, fits)])
    frame.to_csv(path, index=False, float_format=settings.CSV_FLOAT_FORMAT)


def fit_assets(returns, assets, strict=True):
    """
    One fit per column of `returns`. With `strict=False` a restart set that
    did not converge falls back to its best parameters with a warning.
    """
    returns = np.asarray(returns, dtype=np.float64)
    fits = []
    for column, asset in enumerate(assets):
        r = returns[:, column]
        try:
            fits.append(garch_fit(r))
        except GarchConvergenceError as error:
            if strict or error.best is None:
                raise GarchConvergenceError(f"{asset}: {error}", error.best, error.loglik) from error
            logger.warning("%s: %s; using the best parameters found", asset, error)
            variances = garch_variances(r, error.best, float(r.var()))
            fits.append(GarchFit(error.best, variances, float(error.loglik), 0))
    return fits
