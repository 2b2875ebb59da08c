"""
Reverse-mode differentiation tape over numpy arrays.

Every operation on a Tensor records its parents and a closure mapping the
upstream gradient to one gradient per parent. `Tensor.backward()` walks the
recorded graph in reverse topological order and accumulates gradients into
the `grad` field of leaf tensors created with `requires_grad=True`.

Only the broadcasting the model needs is supported: a trailing-axis vector
added to or multiplied with a batch matrix, and scalars.
"""
import numpy as np

from nncore.exceptions import ShapeError


def _unbroadcast(grad, shape):
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def _topological_order(root):
    order = []
    visited = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))
    return order


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "name", "_parents", "_backward")
    # ndarray <op> Tensor must defer to the Tensor reflected operator.
    __array_ufunc__ = None

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = ()
        self._backward = None

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{label})"

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def __len__(self):
        return len(self.data)

    def numpy(self):
        return self.data

    def item(self):
        return float(self.data)

    def zero_grad(self):
        self.grad = None

    def is_finite(self):
        return bool(np.all(np.isfinite(self.data)))

    @staticmethod
    def lift(value):
        if isinstance(value, Tensor):
            return value
        return Tensor(value)

    @staticmethod
    def _make(data, parents, backward):
        requires_grad = any(parent.requires_grad for parent in parents)
        out = Tensor(data, requires_grad=requires_grad)
        if requires_grad:
            out._parents = tuple(parents)
            out._backward = backward
        return out

    def backward(self, grad=None):
        if grad is None:
            if self.size != 1:
                raise ShapeError(
                    f"backward() without a seed gradient needs a scalar, got shape {self.shape}"
                )
            grad = np.ones_like(self.data)
        if not self.requires_grad:
            return
        grads = {id(self): np.asarray(grad, dtype=np.float64)}
        for node in reversed(_topological_order(self)):
            upstream = grads.pop(id(node), None)
            if upstream is None:
                continue
            if node._backward is None:
                node.grad = upstream if node.grad is None else node.grad + upstream
                continue
            for parent, parent_grad in zip(node._parents, node._backward(upstream)):
                if parent_grad is None or not parent.requires_grad:
                    continue
                parent_grad = _unbroadcast(parent_grad, parent.shape)
                key = id(parent)
                grads[key] = grads[key] + parent_grad if key in grads else parent_grad

    # arithmetic

    def __add__(self, other):
        other = Tensor.lift(other)
        return Tensor._make(self.data + other.data, (self, other), lambda g: (g, g))

    __radd__ = __add__

    def __sub__(self, other):
        other = Tensor.lift(other)
        return Tensor._make(self.data - other.data, (self, other), lambda g: (g, -g))

    def __rsub__(self, other):
        return Tensor.lift(other) - self

    def __neg__(self):
        return Tensor._make(-self.data, (self,), lambda g: (-g,))

    def __mul__(self, other):
        other = Tensor.lift(other)
        a, b = self.data, other.data
        return Tensor._make(a * b, (self, other), lambda g: (g * b, g * a))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Tensor.lift(other)
        a, b = self.data, other.data
        return Tensor._make(
            a / b, (self, other), lambda g: (g / b, -g * a / (b * b))
        )

    def __rtruediv__(self, other):
        return Tensor.lift(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, Tensor):
            raise TypeError("only constant exponents are supported")
        a = self.data
        return Tensor._make(
            a ** exponent, (self,), lambda g: (g * exponent * a ** (exponent - 1),)
        )

    def __matmul__(self, other):
        other = Tensor.lift(other)
        a, b = self.data, other.data
        if b.ndim != 2 or a.ndim not in (1, 2) or a.shape[-1] != b.shape[0]:
            raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")

        def backward(g):
            if a.ndim == 1:
                return g @ b.T, np.outer(a, g)
            return g @ b.T, a.T @ g

        return Tensor._make(a @ b, (self, other), backward)

    def __rmatmul__(self, other):
        return Tensor.lift(other) @ self

    # elementwise functions

    def square(self):
        a = self.data
        return Tensor._make(a * a, (self,), lambda g: (2.0 * g * a,))

    def exp(self):
        out = np.exp(self.data)
        return Tensor._make(out, (self,), lambda g: (g * out,))

    def log(self):
        a = self.data
        return Tensor._make(np.log(a), (self,), lambda g: (g / a,))

    def tanh(self):
        out = np.tanh(self.data)
        return Tensor._make(out, (self,), lambda g: (g * (1.0 - out * out),))

    def sigmoid(self):
        a = self.data
        decay = np.exp(-np.abs(a))
        out = np.where(a >= 0, 1.0 / (1.0 + decay), decay / (1.0 + decay))
        return Tensor._make(out, (self,), lambda g: (g * out * (1.0 - out),))

    def relu(self):
        a = self.data
        mask = a > 0
        return Tensor._make(a * mask, (self,), lambda g: (g * mask,))

    # reductions and reshaping

    def sum(self, axis=None, keepdims=False):
        shape = self.shape

        def backward(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._make(self.data.sum(axis=axis, keepdims=keepdims), (self,), backward)

    def mean(self, axis=None, keepdims=False):
        count = self.size if axis is None else self.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) / count

    def reshape(self, *shape):
        source = self.shape
        return Tensor._make(
            self.data.reshape(*shape), (self,), lambda g: (g.reshape(source),)
        )

    def __getitem__(self, index):
        source = self.shape

        def backward(g):
            out = np.zeros(source)
            np.add.at(out, index, g)
            return (out,)

        return Tensor._make(self.data[index], (self,), backward)


def concat(tensors, axis=-1):
    tensors = [Tensor.lift(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum(sizes)[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return Tensor._make(
        np.concatenate([t.data for t in tensors], axis=axis), tensors, backward
    )


def stack(tensors, axis=0):
    tensors = [Tensor.lift(t) for t in tensors]

    def backward(g):
        return tuple(np.moveaxis(g, axis, 0))

    return Tensor._make(np.stack([t.data for t in tensors], axis=axis), tensors, backward)


def zeros(*shape):
    return Tensor(np.zeros(shape))
