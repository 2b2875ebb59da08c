"""
Which latent units carry information about the input.

For a window the encoder samples one latent chain; at every step both the
posterior mean and the prior mean are evaluated on that same chain. The
activity of unit (m, k) is the variance, across windows, of the difference
of the two means. A unit whose posterior never moves away from the prior has
activity zero.
"""
import hashlib
import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd
from django.conf import settings

from nncore.exceptions import NonFiniteError

logger = logging.getLogger(__name__)

INACTIVE_THRESHOLD = 0.01
ACTIVE_THRESHOLD = 0.02


@dataclass
class ActivityMatrix:
    """Activities with one row per time step and one column per latent unit."""

    values: np.ndarray
    threshold: float = INACTIVE_THRESHOLD
    active_threshold: float = ACTIVE_THRESHOLD

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"activities must be a steps x units grid, got shape {self.values.shape}")
        if np.any(self.values < 0):
            raise ValueError("activities are variances and cannot be negative")

    @property
    def shape(self):
        return self.values.shape

    @property
    def inactive(self):
        return self.values < self.threshold

    @property
    def active(self):
        return self.values >= self.active_threshold

    def active_columns(self, step):
        return [int(k) for k in np.flatnonzero(self.active[step])]

    def avg_active_count(self):
        return avg_active_count(self)

    def to_frame(self):
        steps, units = self.shape
        return pd.DataFrame(
            self.values,
            index=pd.Index(range(1, steps + 1), name="step"),
            columns=[f"z{k + 1}" for k in range(units)],
        )

    def write_csv(self, path):
        self.to_frame().to_csv(path, float_format=settings.CSV_FLOAT_FORMAT)


def avg_active_count(activity):
    """Percentage of (step, unit) cells at or above the active threshold."""
    if activity.values.size == 0:
        return 0.0
    return float(100.0 * np.mean(activity.active))


def window_noise(window, latent_dim, seed=0):
    """Standard normal noise of shape (M, latent_dim) keyed on the window's bytes."""
    window = np.ascontiguousarray(window, dtype=np.float64)
    key = int.from_bytes(hashlib.sha256(window.tobytes()).digest()[:8], "little")
    rng = np.random.default_rng([seed, key])
    return rng.standard_normal((window.shape[0], latent_dim))


def _check_parameters(model):
    for name, param in model.named_parameters():
        if not np.all(np.isfinite(param.data)):
            raise NonFiniteError(f"parameter {name} holds non-finite values", name=name)


def activity_statistic(model, windows, n_eval=None, rng=None, seed=0, batch_size=256):
    """
    ActivityMatrix of `model` over `windows` (N, M, d).

    All windows are used unless `n_eval` caps the count, in which case a
    subset is drawn with `rng`. Latent chains use noise derived from each
    window's content, so the result does not depend on window order.
    """
    _check_parameters(model)
    windows = np.asarray(windows, dtype=np.float64)
    if windows.ndim != 3 or len(windows) < 2:
        raise ValueError(f"activity needs at least two windows of shape (M, d), got {windows.shape}")
    if n_eval is not None and n_eval < len(windows):
        if n_eval < 2:
            raise ValueError(f"n_eval must be at least 2, got {n_eval}")
        rng = rng if rng is not None else np.random.default_rng(seed)
        windows = windows[np.sort(rng.choice(len(windows), size=n_eval, replace=False))]
    latent_dim = model.config.latent_dim
    differences = []
    for start in range(0, len(windows), batch_size):
        batch = windows[start:start + batch_size]
        noise = np.stack([window_noise(window, latent_dim, seed) for window in batch])
        path = model.encode_sequence(batch, rng, training=False, noise=noise)
        differences.append(np.stack(
            [posterior.mean.data - prior.mean.data for posterior, prior in zip(path.posteriors, path.priors)],
            axis=1,
        ))
    values = np.var(np.concatenate(differences), axis=0)
    activity = ActivityMatrix(values)
    logger.info(
        "activity over %d windows: %.1f%% active, max %.4g",
        len(windows), activity.avg_active_count(), values.max(),
    )
    return activity
