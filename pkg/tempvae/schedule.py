from dataclasses import dataclass


@dataclass(frozen=True)
class BetaSchedule:
    """
    KL weight per epoch: final * (1 - decay_rate ** (epoch / decay_steps)).

    Starts at 0 and rises monotonically towards `final`. With annealing off
    the weight is `final` from the first epoch.
    """

    final: float = 1.0
    decay_rate: float = 0.96
    decay_steps: int = 20
    anneal: bool = True

    def __call__(self, epoch):
        if epoch < 0:
            raise ValueError(f"epoch must be non-negative, got {epoch}")
        if not self.anneal:
            return self.final
        return self.final * (1.0 - self.decay_rate ** (epoch / self.decay_steps))


def beta_at_epoch(schedule, epoch):
    return schedule(epoch)
