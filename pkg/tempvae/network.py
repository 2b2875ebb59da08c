"""
The temporal VAE: a latent prior chain, a generative decoder and a
bidirectional inference network.

All sequence inputs are batches of standardized windows with shape
(batch, M, d); per-step tensors have shape (batch, size). Initial RNN states
and the latent before the first step are zero vectors.
"""
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from nncore.autograd import Tensor, zeros
from nncore.distributions import GaussianDiag, GaussianRank1
from nncore.exceptions import NonFiniteError, ShapeError
from nncore.layers import GruCell, GruDropout, Mlp, Module, concat_inputs, l2_penalty


def _as_batch(r, obs_dim):
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 3 or r.shape[-1] != obs_dim:
        raise ShapeError(f"expected windows of shape (batch, M, {obs_dim}), got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise NonFiniteError("return windows contain non-finite values", name="r")
    return r


class PriorNetwork(Module):
    """h_t = GRU(h_{t-1}, z_{t-1}); (mean, std) of Z_t = MLP(h_t)."""

    def __init__(self, config, rng):
        super().__init__()
        self.rnn = GruCell(config.latent_dim, config.prior_rnn_dim, rng)
        self.mlp = Mlp(
            config.prior_rnn_dim,
            config.mlp_hidden,
            {"mean": (config.latent_dim, "none"), "std": (config.latent_dim, "exp")},
            rng,
        )

    def step(self, h_prev, z_prev, dropout=None):
        h = self.rnn.step(h_prev, z_prev, dropout)
        out = self.mlp(h)
        return GaussianDiag(out["mean"], out["std"]), h


class DecoderNetwork(Module):
    """h_t = GRU(h_{t-1}, [z_t, r_{t-1}]); rank-1 Gaussian over R_t = MLP(h_t)."""

    def __init__(self, config, rng):
        super().__init__()
        self.obs_dim = config.obs_dim
        self.autoregressive = config.ar_decoder
        self.zero_mean = config.zero_mean_decoder
        self.diagonal = config.diag_decoder_cov
        input_size = config.latent_dim + (config.obs_dim if self.autoregressive else 0)
        heads = {"std": (config.obs_dim, "exp")}
        if not self.zero_mean:
            heads["mean"] = (config.obs_dim, "none")
        if not self.diagonal:
            heads["perturb"] = (config.obs_dim, "none")
        self.rnn = GruCell(input_size, config.rnn_dim, rng)
        self.mlp = Mlp(config.rnn_dim, config.mlp_hidden, heads, rng)

    def step(self, h_prev, z_t, r_prev=None, dropout=None):
        if (r_prev is not None) != self.autoregressive:
            raise ValueError(
                "r_prev must be given exactly when the decoder is autoregressive "
                f"(ar_decoder={self.autoregressive})"
            )
        x = concat_inputs(z_t, r_prev) if self.autoregressive else z_t
        h = self.rnn.step(h_prev, x, dropout)
        out = self.mlp(h)
        std = out["std"]
        mean = zeros(*std.shape) if self.zero_mean else out["mean"]
        perturb = zeros(*std.shape) if self.diagonal else out["perturb"]
        return GaussianRank1(mean, std.square(), perturb), h


class EncoderNetwork(Module):
    """
    Inference network q(z_t | z_{<t}, r_{1:M}).

    The forward state at t has read r_1..r_t and the backward state
    r_t..r_M. The latent recurrence consumes [z_{t-1}, forward_t, backward_t]
    (without the forward part for the backward-only variant).

    The MLP outputs the posterior relative to the prior evaluated on the same
    latent history: mean = prior mean + shift, std = prior std * scale. Both
    heads start at zero weights, so an untrained posterior equals the prior
    and a unit the reconstruction never needs stays at zero KL.
    """

    def __init__(self, config, rng):
        super().__init__()
        self.backward_only = config.backward_only_encoder
        self.deterministic = config.deterministic_bottleneck
        self.forward_rnn = None if self.backward_only else GruCell(config.obs_dim, config.rnn_dim, rng)
        self.backward_rnn = GruCell(config.obs_dim, config.rnn_dim, rng)
        context = config.rnn_dim * (1 if self.backward_only else 2)
        self.latent_rnn = GruCell(config.latent_dim + context, config.rnn_dim, rng)
        heads = {"shift": (config.latent_dim, "none")}
        if not self.deterministic:
            heads["scale"] = (config.latent_dim, "exp")
        self.mlp = Mlp(config.rnn_dim, config.mlp_hidden, heads, rng, zero_heads=tuple(heads))

    def context(self, steps, forward_dropout=None, backward_dropout=None):
        backward = self.backward_rnn.unroll(steps, dropout=backward_dropout, reverse=True)
        if self.backward_only:
            return [[state] for state in backward]
        forward = self.forward_rnn.unroll(steps, dropout=forward_dropout)
        return [[fwd, bwd] for fwd, bwd in zip(forward, backward)]

    def step(self, h_prev, z_prev, context, prior, dropout=None):
        h = self.latent_rnn.step(h_prev, concat_inputs(z_prev, *context), dropout)
        out = self.mlp(h)
        mean = prior.mean + out["shift"]
        std = zeros(*mean.shape) if self.deterministic else prior.std * out["scale"]
        return GaussianDiag(mean, std), h


@dataclass
class LatentPath:
    """One sampled latent chain with the posterior and prior at every step."""

    samples: list
    posteriors: list
    priors: list
    prior_state: Tensor = None

    @property
    def z(self):
        return np.stack([sample.data for sample in self.samples], axis=-2)

    def __len__(self):
        return len(self.samples)

    def kl_terms(self):
        return [q.kl(p) for q, p in zip(self.posteriors, self.priors)]

    def kl(self):
        """Per-window sum over steps of KL(q_t || p_t)."""
        terms = self.kl_terms()
        total = terms[0]
        for term in terms[1:]:
            total = total + term
        return total

    def log_q(self):
        total = self.posteriors[0].log_prob(self.samples[0])
        for dist, sample in zip(self.posteriors[1:], self.samples[1:]):
            total = total + dist.log_prob(sample)
        return total

    def log_p(self):
        total = self.priors[0].log_prob(self.samples[0])
        for dist, sample in zip(self.priors[1:], self.samples[1:]):
            total = total + dist.log_prob(sample)
        return total


class Elbo(NamedTuple):
    loss: Tensor
    reconstruction: Tensor
    kl: Tensor


class TempVae(Module):
    def __init__(self, config, rng):
        super().__init__()
        self.config = config
        self.prior = PriorNetwork(config, rng)
        self.decoder = DecoderNetwork(config, rng)
        self.encoder = EncoderNetwork(config, rng)
        if not config.trainable_prior:
            self.prior.set_trainable(False)

    def _dropout(self, cell, batch_shape, rng, training):
        return GruDropout.sample(
            batch_shape, cell.input_size, cell.hidden_size, self.config.effective_dropout, rng, training
        )

    def prior_step(self, h_prev, z_prev, dropout=None):
        return self.prior.step(h_prev, z_prev, dropout)

    def decode_step(self, h_prev, z_t, r_prev=None, dropout=None):
        return self.decoder.step(h_prev, z_t, r_prev, dropout)

    def encode_sequence(self, r, rng, training=False, noise=None):
        """
        Run the inference network over windows `r` (batch, M, d) and sample
        a latent path step by step; the prior is evaluated on the same
        sampled history. `noise`, if given, has shape (batch, M, latent_dim).
        """
        r = _as_batch(r, self.config.obs_dim)
        batch, length, _ = r.shape
        steps = [r[:, t, :] for t in range(length)]
        encoder = self.encoder
        forward_dropout = None
        if encoder.forward_rnn is not None:
            forward_dropout = self._dropout(encoder.forward_rnn, (batch,), rng, training)
        backward_dropout = self._dropout(encoder.backward_rnn, (batch,), rng, training)
        latent_dropout = self._dropout(encoder.latent_rnn, (batch,), rng, training)
        prior_dropout = self._dropout(self.prior.rnn, (batch,), rng, training)

        contexts = encoder.context(steps, forward_dropout, backward_dropout)
        h_q = encoder.latent_rnn.initial_state((batch,))
        h_p = self.prior.rnn.initial_state((batch,))
        z_prev = zeros(batch, self.config.latent_dim)
        path = LatentPath(samples=[], posteriors=[], priors=[])
        for t in range(length):
            prior, h_p = self.prior.step(h_p, z_prev, prior_dropout)
            posterior, h_q = encoder.step(h_q, z_prev, contexts[t], prior, latent_dropout)
            eps = None if noise is None else noise[:, t, :]
            z_prev = posterior.sample(rng, noise=eps)
            path.samples.append(z_prev)
            path.posteriors.append(posterior)
            path.priors.append(prior)
        path.prior_state = h_p
        return path

    def decode_path(self, samples, r=None, rng=None, training=False):
        """Observation distribution at every step of a latent path."""
        if self.config.ar_decoder and r is None:
            raise ValueError("the autoregressive decoder needs the observed windows")
        batch = samples[0].shape[:-1]
        dropout = self._dropout(self.decoder.rnn, batch, rng, training)
        h = self.decoder.rnn.initial_state(batch)
        dists = []
        for t, z_t in enumerate(samples):
            r_prev = None
            if self.config.ar_decoder:
                r_prev = r[:, t - 1, :] if t > 0 else np.zeros(batch + (self.config.obs_dim,))
            dist, h = self.decoder.step(h, z_t, r_prev, dropout)
            dists.append(dist)
        return dists, h

    def regularizer(self):
        weights = [
            weight
            for network in (self.prior, self.decoder, self.encoder)
            for weight in network.mlp.hidden_weights()
            if weight.requires_grad
        ]
        return l2_penalty(weights, self.config.effective_l2)

    def elbo(self, r, beta, rng, training=True):
        """
        Negative beta-weighted ELBO averaged over the windows of `r`.

        Each of `mc_samples` latent paths contributes the summed
        reconstruction log-likelihood and the summed closed-form per-step KL;
        `reconstruction` and `kl` are reported per window.
        """
        if beta < 0:
            raise ValueError(f"beta must be non-negative, got {beta}")
        r = _as_batch(r, self.config.obs_dim)
        batch = r.shape[0]
        samples = self.config.mc_samples
        reconstruction = Tensor(0.0)
        kl = Tensor(0.0)
        for _ in range(samples):
            path = self.encode_sequence(r, rng, training=training)
            dists, _ = self.decode_path(path.samples, r, rng, training=training)
            for t, dist in enumerate(dists):
                reconstruction = reconstruction + dist.log_prob(r[:, t, :]).sum()
            if not self.config.deterministic_bottleneck:
                kl = kl + path.kl().sum()
        scale = 1.0 / (samples * batch)
        reconstruction = reconstruction * scale
        kl = kl * scale
        loss = -(reconstruction - beta * kl) + self.regularizer()
        return Elbo(loss, reconstruction, kl)

    def forecast_next(self, history, n_samples, rng):
        """
        Sample the next standardized return vector given the last M-1 steps.

        The history is encoded into z_1..z_{M-1}, the prior advances one step
        to z_M and the decoder samples R_M. Returns (n_samples, d).
        """
        if n_samples < 1:
            raise ValueError(f"n_samples must be at least 1, got {n_samples}")
        history = np.asarray(history, dtype=np.float64)
        needed = self.config.window - 1
        if history.ndim != 2 or history.shape[0] < needed:
            raise ValueError(
                f"history must hold at least {needed} steps of {self.config.obs_dim} returns, "
                f"got shape {history.shape}"
            )
        window = np.repeat(history[None, -needed:, :], n_samples, axis=0)
        path = self.encode_sequence(window, rng, training=False)
        prior, _ = self.prior.step(path.prior_state, path.samples[-1])
        z_next = prior.sample(rng)
        _, h = self.decode_path(path.samples, window)
        r_prev = window[:, -1, :] if self.config.ar_decoder else None
        dist, _ = self.decoder.step(h, z_next, r_prev)
        return dist.sample(rng).data

    def generate(self, length, n_paths, rng):
        """Ancestral samples of (n_paths, length, d) return paths."""
        d = self.config.obs_dim
        h_p = self.prior.rnn.initial_state((n_paths,))
        h_r = self.decoder.rnn.initial_state((n_paths,))
        z = zeros(n_paths, self.config.latent_dim)
        r_prev = np.zeros((n_paths, d))
        paths = []
        for _ in range(length):
            prior, h_p = self.prior.step(h_p, z)
            z = prior.sample(rng)
            dist, h_r = self.decoder.step(h_r, z, r_prev if self.config.ar_decoder else None)
            r_prev = dist.sample(rng).data
            paths.append(r_prev)
        return np.stack(paths, axis=1)

    def prior_parameters(self):
        return list(self.prior.named_parameters(prefix="prior."))
