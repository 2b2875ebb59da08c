import logging
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from nncore.checkpoint import load_arrays, save_arrays
from nncore.exceptions import CheckpointError
from nncore.optim import Adam
from tempvae.exceptions import TrainingDivergedError

logger = logging.getLogger(__name__)

CHECKPOINT_STEM = "params"


@dataclass
class EpochMetrics:
    epoch: int
    loss: float
    reconstruction: float
    kl: float
    beta: float
    learning_rate: float

    def as_dict(self):
        return asdict(self)


def epoch_rng(seed, epoch):
    """Random stream for one epoch, independent of how many epochs ran before."""
    return np.random.default_rng([seed, epoch])


def batch_indices(count, batch_size, rng):
    """Shuffled mini-batches; the remainder forms a last, smaller batch."""
    order = rng.permutation(count)
    return [order[start:start + batch_size] for start in range(0, count, batch_size)]


class Trainer:
    """
    Mini-batch Adam over the trainable sub-networks of a TempVae.

    The KL weight follows the config's beta schedule per epoch and the
    learning rate decays per optimizer step.
    """

    def __init__(self, model, seed, optimizer=None, start_epoch=0, log_every=10):
        self.model = model
        self.config = model.config
        self.seed = seed
        self.optimizer = optimizer or Adam(model.trainable_parameters(), self.config.lr_schedule)
        self.epoch = start_epoch
        self.log_every = log_every

    def train_epoch(self, windows):
        windows = np.asarray(windows, dtype=np.float64)
        if len(windows) == 0:
            raise ValueError("training needs at least one window")
        epoch = self.epoch
        rng = epoch_rng(self.seed, epoch)
        beta = self.config.beta_schedule(epoch)
        totals = np.zeros(3)
        learning_rate = self.optimizer.state.learning_rate
        for number, index in enumerate(batch_indices(len(windows), self.config.batch_size, rng)):
            self.model.zero_grad()
            terms = self.model.elbo(windows[index], beta, rng, training=True)
            values = np.array([terms.loss.item(), terms.reconstruction.item(), terms.kl.item()])
            if not np.all(np.isfinite(values)):
                raise TrainingDivergedError(epoch, number, *values)
            terms.loss.backward()
            learning_rate = self.optimizer.step()
            totals += values * len(index)
        loss, reconstruction, kl = totals / len(windows)
        self.epoch += 1
        return EpochMetrics(
            epoch, float(loss), float(reconstruction), float(kl), float(beta), float(learning_rate)
        )

    def fit(self, windows, epochs=None, on_epoch=None):
        """Train until `epochs` total epochs have run; returns the new metrics."""
        epochs = self.config.epochs if epochs is None else epochs
        history = []
        while self.epoch < epochs:
            metrics = self.train_epoch(windows)
            history.append(metrics)
            if metrics.epoch % self.log_every == 0 or self.epoch == epochs:
                logger.info(
                    "epoch %d loss=%.6g recon=%.6g kl=%.6g beta=%.4g lr=%.3g",
                    metrics.epoch, metrics.loss, metrics.reconstruction, metrics.kl,
                    metrics.beta, metrics.learning_rate,
                )
            if on_epoch is not None:
                on_epoch(self, metrics)
        return history

    def save_checkpoint(self, directory):
        arrays = dict(self.model.state_dict())
        arrays.update(self.optimizer.state.arrays())
        arrays["trainer.epoch"] = np.array([float(self.epoch)])
        save_arrays(Path(directory) / CHECKPOINT_STEM, arrays)

    def load_checkpoint(self, directory):
        """Restore parameters, Adam moments and the epoch counter."""
        arrays = load_checkpoint_arrays(directory)
        if "trainer.epoch" not in arrays:
            raise CheckpointError(f"checkpoint in {directory} has no trainer state")
        _load_parameters(self.model, arrays)
        self.optimizer.state.load_arrays(
            {name: value for name, value in arrays.items() if name.startswith("adam.")}
        )
        self.epoch = int(arrays["trainer.epoch"][0])
        logger.info("resumed from %s at epoch %d", directory, self.epoch)
        return self.epoch


def load_checkpoint_arrays(directory):
    return load_arrays(Path(directory) / CHECKPOINT_STEM)


def _load_parameters(model, arrays):
    own = {name for name, _ in model.named_parameters()}
    model.load_state_dict({name: value for name, value in arrays.items() if name in own})


def load_model_parameters(model, directory):
    _load_parameters(model, load_checkpoint_arrays(directory))
    return model
