"""Synthetic return series: Gaussian noise and rotated oscillating factors."""
import logging
from dataclasses import dataclass

import numpy as np

from market.returns import log_returns

logger = logging.getLogger(__name__)

PRICE_LEVEL = 5.0
FREQUENCY_RANGE = (0.5, 24.0)


def gen_noise(T, d, rng):
    """T x d i.i.d. standard normal returns."""
    if T < 1 or d < 1:
        raise ValueError(f"T and d must be positive, got T={T}, d={d}")
    return rng.standard_normal((T, d))


def random_rotation(d, k, rng):
    """d x k matrix with orthonormal columns, Haar-distributed."""
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    q, r = np.linalg.qr(rng.standard_normal((d, k)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


@dataclass
class OscillatorPrices:
    prices: np.ndarray
    rotation: np.ndarray
    intercepts: np.ndarray
    amplitudes: np.ndarray
    frequencies: np.ndarray
    retries: int

    @property
    def returns(self):
        return log_returns(self.prices)


def oscillator_factors(T, intercepts, amplitudes, frequencies, noise):
    """Z[t, j] = i_j + a_j cos(t / 100 * f_j * pi) + a_j eps[t, j] for t = 0..T."""
    t = np.arange(T + 1)[:, None]
    return intercepts + amplitudes * np.cos(t / 100.0 * frequencies * np.pi) + amplitudes * noise


def osc_pca_prices(
    T,
    k,
    d=22,
    rng=None,
    intercepts=None,
    amplitudes=None,
    frequencies=None,
    noise_std=0.02,
    max_retries=100,
):
    """
    Prices S_t = U Z_t + 5 for t = 0..T from k oscillating factors.

    Unset factor parameters are drawn: intercepts and amplitudes from
    U(-1, 1), frequencies from U(0.5, 24). Draws giving a non-positive price
    are rejected and the amplitudes (unless fixed) and rotation redrawn.
    """
    if T < 1:
        raise ValueError(f"T must be positive, got {T}")
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    rng = rng if rng is not None else np.random.default_rng()
    intercepts = rng.uniform(-1.0, 1.0, k) if intercepts is None else np.asarray(intercepts, dtype=float)
    fixed_amplitudes = amplitudes is not None
    if frequencies is None:
        frequencies = rng.uniform(*FREQUENCY_RANGE, k)
    frequencies = np.asarray(frequencies, dtype=float)
    noise = rng.normal(0.0, noise_std, (T + 1, k)) if noise_std > 0 else np.zeros((T + 1, k))

    for retries in range(max_retries + 1):
        current = np.asarray(amplitudes, dtype=float) if fixed_amplitudes else rng.uniform(-1.0, 1.0, k)
        rotation = random_rotation(d, k, rng)
        factors = oscillator_factors(T, intercepts, current, frequencies, noise)
        prices = factors @ rotation.T + PRICE_LEVEL
        if np.all(prices > 0):
            if retries:
                logger.info("oscillating-factor prices accepted after %d retries", retries)
            return OscillatorPrices(prices, rotation, intercepts, current, frequencies, retries)
        logger.debug("rejected draw %d with minimum price %.4g", retries, prices.min())
    raise ValueError(f"no positive price path after {max_retries} retries")


def gen_osc_pca(T, k, d=22, rng=None, **params):
    """T x d log-returns of an oscillating-factor price path."""
    return osc_pca_prices(T, k, d=d, rng=rng, **params).returns
