class TempVaeError(Exception):
    """Base class for model and training errors."""


class TrainingDivergedError(TempVaeError):
    def __init__(self, epoch, batch, loss, reconstruction=None, kl=None):
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch}: "
            f"loss={loss}, reconstruction={reconstruction}, kl={kl}"
        )
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        self.reconstruction = reconstruction
        self.kl = kl
