import numpy as np

from nncore.autograd import Tensor, concat
from nncore.exceptions import ShapeError


ACTIVATIONS = {
    "none": lambda x: x,
    "relu": Tensor.relu,
    "exp": Tensor.exp,
    "tanh": Tensor.tanh,
    "sigmoid": Tensor.sigmoid,
}


def variance_scaling_init(fan_in, fan_out, rng):
    """He-scaled normal weights: variance 2 / fan_in."""
    if fan_in < 1 or fan_out < 1:
        raise ValueError(
            f"fan dimensions must be positive, got fan_in={fan_in}, fan_out={fan_out}"
        )
    return rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))


def dropout_mask(shape, rate, rng, training=True):
    """Inverted dropout: zeros with probability `rate`, survivors scaled by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return np.ones(shape)
    keep = rng.random(shape) >= rate
    return keep / (1.0 - rate)


def l2_penalty(weights, lam):
    if lam < 0:
        raise ValueError(f"l2 lambda must be non-negative, got {lam}")
    total = Tensor(0.0)
    if lam == 0:
        return total
    for weight in weights:
        total = total + weight.square().sum()
    return total * lam


class Module:
    """
    Holds named parameters and child modules.

    Parameters are registered through `add_parameter`; child modules are any
    attribute that is a Module. Names are qualified with the attribute path,
    e.g. `decoder.rnn.w_z`.
    """

    def __init__(self):
        self._params = {}

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def add_parameter(self, name, value):
        param = Tensor(value, requires_grad=True, name=name)
        self._params[name] = param
        setattr(self, name, param)
        return param

    def children(self):
        for name, attr in self.__dict__.items():
            if isinstance(attr, Module):
                yield name, attr
            elif isinstance(attr, (list, tuple)):
                for position, item in enumerate(attr):
                    if isinstance(item, Module):
                        yield f"{name}.{position}", item

    def named_parameters(self, prefix=""):
        for name, param in self._params.items():
            yield prefix + name, param
        for name, child in self.children():
            yield from child.named_parameters(prefix=f"{prefix}{name}.")

    def parameters(self):
        return [param for _, param in self.named_parameters()]

    def trainable_parameters(self):
        return [
            (name, param) for name, param in self.named_parameters() if param.requires_grad
        ]

    def set_trainable(self, flag):
        for param in self.parameters():
            param.requires_grad = flag
            param.grad = None

    def zero_grad(self):
        for param in self.parameters():
            param.grad = None

    def state_dict(self):
        return {name: param.data.copy() for name, param in self.named_parameters()}

    def load_state_dict(self, state):
        own = dict(self.named_parameters())
        missing = set(own) - set(state)
        unexpected = set(state) - set(own)
        if missing or unexpected:
            raise ShapeError(
                f"parameter names differ: missing={sorted(missing)}, unexpected={sorted(unexpected)}"
            )
        for name, param in own.items():
            value = np.asarray(state[name], dtype=np.float64)
            if value.shape != param.shape:
                raise ShapeError(f"{name}: expected shape {param.shape}, got {value.shape}")
            param.data = value.copy()


class Dense(Module):
    def __init__(self, in_features, out_features, rng, activation="none"):
        super().__init__()
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.in_features = in_features
        self.out_features = out_features
        self.activation = activation
        self.add_parameter("weight", variance_scaling_init(in_features, out_features, rng))
        self.add_parameter("bias", np.zeros(out_features))

    def forward(self, x):
        x = Tensor.lift(x)
        if x.shape[-1] != self.in_features:
            raise ShapeError(
                f"dense layer expects {self.in_features} inputs, got shape {x.shape}"
            )
        return ACTIVATIONS[self.activation](x @ self.weight + self.bias)


class Mlp(Module):
    """
    ReLU hidden layers followed by one output layer per named head.

    Heads listed in `zero_heads` start with zero weights, so their initial
    output is the activation of the bias alone.
    """

    def __init__(self, in_features, hidden, heads, rng, zero_heads=()):
        super().__init__()
        self.hidden = []
        width = in_features
        for size in hidden:
            self.hidden.append(Dense(width, size, rng, activation="relu"))
            width = size
        self.head_names = list(heads)
        unknown = set(zero_heads) - set(heads)
        if unknown:
            raise ValueError(f"zero_heads names unknown heads {sorted(unknown)}")
        for name, (size, activation) in heads.items():
            layer = Dense(width, size, rng, activation=activation)
            if name in zero_heads:
                layer.weight.data[...] = 0.0
            setattr(self, name, layer)

    def forward(self, x):
        for layer in self.hidden:
            x = layer(x)
        return {name: getattr(self, name)(x) for name in self.head_names}

    def hidden_weights(self):
        return [layer.weight for layer in self.hidden]


class GruDropout:
    """One inverted-dropout mask per gate for the input and the recurrent state."""

    GATES = ("z", "r", "h")

    def __init__(self, input_masks, hidden_masks):
        self.input_masks = input_masks
        self.hidden_masks = hidden_masks

    @classmethod
    def sample(cls, batch_shape, input_size, hidden_size, rate, rng, training):
        if not training or rate == 0.0:
            return None
        batch_shape = tuple(batch_shape)
        return cls(
            {gate: dropout_mask(batch_shape + (input_size,), rate, rng) for gate in cls.GATES},
            {gate: dropout_mask(batch_shape + (hidden_size,), rate, rng) for gate in cls.GATES},
        )


class GruCell(Module):
    """
    Gated recurrent unit with the candidate-mix update

        z = sigmoid(x W_z + h U_z + b_z)
        r = sigmoid(x W_r + h U_r + b_r)
        c = tanh(x W_h + (r * h) U_h + b_h)
        h' = (1 - z) * h + z * c
    """

    def __init__(self, input_size, hidden_size, rng):
        super().__init__()
        self.input_size = input_size
        self.hidden_size = hidden_size
        for gate in GruDropout.GATES:
            self.add_parameter(f"w_{gate}", variance_scaling_init(input_size, hidden_size, rng))
            self.add_parameter(f"u_{gate}", variance_scaling_init(hidden_size, hidden_size, rng))
            self.add_parameter(f"b_{gate}", np.zeros(hidden_size))

    def initial_state(self, batch_shape=()):
        return Tensor(np.zeros(tuple(batch_shape) + (self.hidden_size,)))

    def step(self, h_prev, x, dropout=None):
        h_prev, x = Tensor.lift(h_prev), Tensor.lift(x)
        if h_prev.shape[-1] != self.hidden_size or x.shape[-1] != self.input_size:
            raise ShapeError(
                f"gru expects state {self.hidden_size} and input {self.input_size}, "
                f"got {h_prev.shape} and {x.shape}"
            )
        if dropout is None:
            xs = {gate: x for gate in GruDropout.GATES}
            hs = {gate: h_prev for gate in GruDropout.GATES}
        else:
            xs = {gate: x * dropout.input_masks[gate] for gate in GruDropout.GATES}
            hs = {gate: h_prev * dropout.hidden_masks[gate] for gate in GruDropout.GATES}

        update = (xs["z"] @ self.w_z + hs["z"] @ self.u_z + self.b_z).sigmoid()
        reset = (xs["r"] @ self.w_r + hs["r"] @ self.u_r + self.b_r).sigmoid()
        candidate = (xs["h"] @ self.w_h + (reset * hs["h"]) @ self.u_h + self.b_h).tanh()
        return (1.0 - update) * h_prev + update * candidate

    forward = step

    def unroll(self, inputs, h0=None, dropout=None, reverse=False):
        """Run the cell over a list of per-step inputs; returns the per-step states."""
        steps = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
        h = h0 if h0 is not None else self.initial_state(inputs[0].shape[:-1])
        states = [None] * len(inputs)
        for t in steps:
            h = self.step(h, inputs[t], dropout)
            states[t] = h
        return states


def concat_inputs(*parts):
    return concat([Tensor.lift(part) for part in parts], axis=-1)
