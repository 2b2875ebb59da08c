from dataclasses import asdict, dataclass, fields

from django.conf import settings

from nncore.optim import ExponentialDecay
from tempvae.schedule import BetaSchedule

VARIANT_FLAGS = {
    "no_anneal": "noAnneal",
    "trainable_prior": "trainablePrior",
    "ar_decoder": "arDecoder",
    "diag_decoder_cov": "diagCov",
    "zero_mean_decoder": "zeroMean",
    "backward_only_encoder": "backwards",
    "deterministic_bottleneck": "det",
    "no_dropout": "noDropout",
    "no_l2": "noL2",
}


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture, schedule and training knobs of one model.

    `obs_dim` is the number of assets; everything else defaults to the
    values in settings.TEMPVAE (see `from_settings`).
    """

    obs_dim: int
    latent_dim: int = 10
    rnn_dim: int = 16
    prior_rnn_dim: int = 16
    mlp_hidden: tuple = (16, 16)
    window: int = 21
    beta_final: float = 1.0
    beta_decay_rate: float = 0.96
    beta_decay_steps: int = 20
    dropout_rate: float = 0.1
    l2_lambda: float = 0.01
    learning_rate: float = 1e-3
    lr_decay_rate: float = 0.96
    lr_decay_steps: int = 500
    epochs: int = 1000
    batch_size: int = 256
    mc_samples: int = 1
    train_frac: float = 0.66
    checkpoint_every: int = 50
    trainable_prior: bool = False
    ar_decoder: bool = False
    backward_only_encoder: bool = False
    zero_mean_decoder: bool = False
    diag_decoder_cov: bool = False
    no_anneal: bool = False
    no_dropout: bool = False
    no_l2: bool = False
    deterministic_bottleneck: bool = False
    high_dim: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mlp_hidden", tuple(int(size) for size in self.mlp_hidden))
        for name in ("obs_dim", "latent_dim", "rnn_dim", "prior_rnn_dim", "batch_size", "mc_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be at least 1, got {getattr(self, name)}")
        if self.window < 2:
            raise ValueError(f"window must be at least 2, got {self.window}")
        if not self.mlp_hidden or min(self.mlp_hidden) < 1:
            raise ValueError(f"mlp_hidden sizes must be positive, got {self.mlp_hidden}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")
        if self.l2_lambda < 0:
            raise ValueError(f"l2_lambda must be non-negative, got {self.l2_lambda}")
        if not 0.0 < self.train_frac < 1.0:
            raise ValueError(f"train_frac must be in (0, 1), got {self.train_frac}")

    @classmethod
    def field_names(cls):
        return [field.name for field in fields(cls)]

    @classmethod
    def from_settings(cls, obs_dim, **overrides):
        """settings.TEMPVAE < settings.TEMPVAE_HIGH_DIM (if high_dim) < overrides."""
        values = dict(settings.TEMPVAE)
        if overrides.get("high_dim"):
            values.update(settings.TEMPVAE_HIGH_DIM)
        values.update(overrides)
        return cls(obs_dim=obs_dim, **values)

    def as_dict(self):
        return asdict(self)

    @property
    def variant_name(self):
        names = [label for flag, label in VARIANT_FLAGS.items() if getattr(self, flag)]
        if self.high_dim:
            names.append("highDim")
        return "TempVAE " + "+".join(names) if names else "TempVAE"

    @property
    def effective_dropout(self):
        return 0.0 if self.no_dropout else self.dropout_rate

    @property
    def effective_l2(self):
        return 0.0 if self.no_l2 else self.l2_lambda

    @property
    def beta_schedule(self):
        return BetaSchedule(
            final=self.beta_final,
            decay_rate=self.beta_decay_rate,
            decay_steps=self.beta_decay_steps,
            anneal=not self.no_anneal,
        )

    @property
    def lr_schedule(self):
        return ExponentialDecay(
            initial=self.learning_rate, rate=self.lr_decay_rate, steps=self.lr_decay_steps
        )
