from dataclasses import dataclass, field

import numpy as np

from nncore.exceptions import NonFiniteError, ShapeError


@dataclass(frozen=True)
class ExponentialDecay:
    """lr(t) = initial * rate ** (t / steps), continuous exponent."""

    initial: float = 1e-3
    rate: float = 0.96
    steps: int = 500

    def __call__(self, step):
        return self.initial * self.rate ** (step / self.steps)


@dataclass
class AdamState:
    schedule: ExponentialDecay
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    first_moment: dict = field(default_factory=dict)
    second_moment: dict = field(default_factory=dict)

    @property
    def learning_rate(self):
        return self.schedule(self.step)

    def arrays(self):
        """Flat named arrays for checkpointing."""
        out = {"adam.step": np.array([float(self.step)])}
        for name, value in self.first_moment.items():
            out[f"adam.m.{name}"] = value
        for name, value in self.second_moment.items():
            out[f"adam.v.{name}"] = value
        return out

    def load_arrays(self, arrays):
        self.step = int(arrays["adam.step"][0])
        self.first_moment = {
            key[len("adam.m."):]: np.array(value)
            for key, value in arrays.items() if key.startswith("adam.m.")
        }
        self.second_moment = {
            key[len("adam.v."):]: np.array(value)
            for key, value in arrays.items() if key.startswith("adam.v.")
        }


class Adam:
    """Adam with bias correction over a list of (name, Tensor) pairs."""

    def __init__(self, named_params, schedule=None, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(named_params)
        self.state = AdamState(
            schedule=schedule or ExponentialDecay(), beta1=beta1, beta2=beta2, eps=eps
        )
        for name, param in self.params:
            self.state.first_moment[name] = np.zeros_like(param.data)
            self.state.second_moment[name] = np.zeros_like(param.data)

    def zero_grad(self):
        for _, param in self.params:
            param.grad = None

    def step(self, grads=None):
        """
        Apply one update. `grads` maps parameter names to gradients; when
        omitted the `grad` field of each parameter is used (missing grads
        count as zero).
        """
        state = self.state
        if grads is None:
            grads = {name: param.grad for name, param in self.params}
        grads = dict(grads)

        for name, param in self.params:
            grad = grads.get(name)
            if grad is None:
                grad = np.zeros_like(param.data)
            if grad.shape != param.shape:
                raise ShapeError(
                    f"gradient for {name} has shape {grad.shape}, parameter has {param.shape}"
                )
            if not np.all(np.isfinite(grad)):
                raise NonFiniteError(f"non-finite gradient for parameter {name}", name=name)
            grads[name] = grad

        lr = state.learning_rate
        state.step += 1
        t = state.step
        for name, param in self.params:
            grad = grads[name]
            m = state.first_moment[name] = (
                state.beta1 * state.first_moment[name] + (1.0 - state.beta1) * grad
            )
            v = state.second_moment[name] = (
                state.beta2 * state.second_moment[name] + (1.0 - state.beta2) * grad * grad
            )
            m_hat = m / (1.0 - state.beta1 ** t)
            v_hat = v / (1.0 - state.beta2 ** t)
            param.data = param.data - lr * m_hat / (np.sqrt(v_hat) + state.eps)
        return lr
