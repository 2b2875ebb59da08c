"""
Gaussian output heads.

Both classes hold Tensors so that sampling (reparameterised), log-densities
and KL divergences stay on the differentiation tape. Methods reduce over the
last axis, so a batch of B distributions of dimension k gives B values.
"""
from dataclasses import dataclass

import numpy as np

from nncore.autograd import Tensor
from nncore.exceptions import ShapeError

LOG_2PI = float(np.log(2.0 * np.pi))


def _noise(rng, noise, shape):
    if noise is not None:
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != shape:
            raise ShapeError(f"noise has shape {noise.shape}, expected {shape}")
        return noise
    return rng.standard_normal(shape)


@dataclass
class GaussianDiag:
    """N(mean, diag(std**2)); std is the stored scale parameter."""

    mean: Tensor
    std: Tensor

    def __post_init__(self):
        self.mean = Tensor.lift(self.mean)
        self.std = Tensor.lift(self.std)
        if self.mean.shape != self.std.shape:
            raise ShapeError(f"mean {self.mean.shape} and std {self.std.shape} differ")

    @property
    def dim(self):
        return self.mean.shape[-1]

    def sample(self, rng=None, noise=None, sample_shape=()):
        eps = _noise(rng, noise, tuple(sample_shape) + self.mean.shape)
        return self.mean + self.std * eps

    def log_prob(self, x):
        if np.any(self.std.data <= 0):
            raise ValueError("standard deviations must be strictly positive")
        z = (Tensor.lift(x) - self.mean) / self.std
        return (
            -0.5 * z.square().sum(axis=-1)
            - self.std.log().sum(axis=-1)
            - 0.5 * self.dim * LOG_2PI
        )

    def kl(self, other):
        """Closed-form KL(self || other), summed over dimensions."""
        if self.mean.shape[-1] != other.mean.shape[-1]:
            raise ShapeError(
                f"KL between dimensions {self.mean.shape[-1]} and {other.mean.shape[-1]}"
            )
        ratio = (self.std / other.std).square()
        shift = ((other.mean - self.mean) / other.std).square()
        return 0.5 * (ratio + shift - 1.0 - ratio.log()).sum(axis=-1)


@dataclass
class GaussianRank1:
    """
    N(mean, D + u u^T) with D = diag(diag) > 0 and u = perturb.

    Log-density uses the matrix-determinant lemma and Sherman-Morrison, so
    no d x d matrix is formed.
    """

    mean: Tensor
    diag: Tensor
    perturb: Tensor

    def __post_init__(self):
        self.mean = Tensor.lift(self.mean)
        self.diag = Tensor.lift(self.diag)
        self.perturb = Tensor.lift(self.perturb)
        if not self.mean.shape == self.diag.shape == self.perturb.shape:
            raise ShapeError(
                f"mean {self.mean.shape}, diag {self.diag.shape} and perturb "
                f"{self.perturb.shape} must agree"
            )

    @property
    def dim(self):
        return self.mean.shape[-1]

    def _check(self):
        if np.any(self.diag.data <= 0):
            raise ValueError("diagonal covariance entries must be strictly positive")

    def sample(self, rng=None, noise=None, sample_shape=()):
        """mean + sqrt(D) eps_1 + u eps_2 with eps_2 one scalar per draw."""
        shape = tuple(sample_shape) + self.mean.shape
        if noise is None:
            eps = rng.standard_normal(shape)
            shared = rng.standard_normal(shape[:-1] + (1,))
        else:
            eps, shared = noise
            eps = _noise(None, eps, shape)
            shared = _noise(None, shared, shape[:-1] + (1,))
        return self.mean + (self.diag ** 0.5) * eps + self.perturb * shared

    def _terms(self):
        inv = 1.0 / self.diag
        capacity = 1.0 + (self.perturb.square() * inv).sum(axis=-1)
        return inv, capacity

    def log_det(self):
        self._check()
        _, capacity = self._terms()
        return self.diag.log().sum(axis=-1) + capacity.log()

    def log_prob(self, x):
        self._check()
        delta = Tensor.lift(x) - self.mean
        inv, capacity = self._terms()
        scaled = delta * inv
        quadratic = (delta * scaled).sum(axis=-1) - (self.perturb * scaled).sum(axis=-1).square() / capacity
        log_det = self.diag.log().sum(axis=-1) + capacity.log()
        return -0.5 * (self.dim * LOG_2PI + log_det + quadratic)

    def covariance(self):
        """Dense D + u u^T (numpy, last two axes)."""
        diag = self.diag.data
        perturb = self.perturb.data
        return (
            np.einsum("...i,ij->...ij", diag, np.eye(diag.shape[-1]))
            + perturb[..., :, None] * perturb[..., None, :]
        )
