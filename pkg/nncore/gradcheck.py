"""Central finite-difference verification of tape gradients."""
import numpy as np

from nncore.exceptions import GradientCheckError


def numerical_gradient(loss_fn, param, step=1e-5, indices=None):
    """
    Central differences of the scalar `loss_fn()` with respect to the
    entries of `param` (perturbed in place and restored).
    """
    values = param.data
    indices = range(values.size) if indices is None else indices
    grad = np.zeros(values.size)
    for i in indices:
        original = values.flat[i]
        values.flat[i] = original + step
        upper = float(loss_fn().data)
        values.flat[i] = original - step
        lower = float(loss_fn().data)
        values.flat[i] = original
        grad[i] = (upper - lower) / (2.0 * step)
    return grad.reshape(param.shape)


def relative_error(analytic, numeric, floor=1e-4):
    return np.abs(analytic - numeric) / np.maximum(
        np.maximum(np.abs(analytic), np.abs(numeric)), floor
    )


def check_gradients(loss_fn, named_params, step=1e-5, rtol=1e-4, floor=1e-4, max_entries=None, rng=None):
    """
    Compare tape gradients of `loss_fn()` against central differences.

    `loss_fn` must be deterministic (fixed noise). At most `max_entries`
    randomly chosen entries per parameter are checked when given. Returns
    the worst relative error; raises GradientCheckError past `rtol`.
    """
    named_params = list(named_params)
    for _, param in named_params:
        param.grad = None
    loss_fn().backward()

    worst = 0.0
    for name, param in named_params:
        analytic = np.zeros(param.shape) if param.grad is None else param.grad
        indices = None
        if max_entries is not None and param.size > max_entries:
            rng = rng or np.random.default_rng(0)
            indices = rng.choice(param.size, size=max_entries, replace=False)
        numeric = numerical_gradient(loss_fn, param, step=step, indices=indices)
        checked = np.arange(param.size) if indices is None else np.asarray(indices)
        errors = relative_error(analytic.reshape(-1)[checked], numeric.reshape(-1)[checked], floor)
        position = int(np.argmax(errors))
        if errors[position] > rtol:
            index = int(checked[position])
            raise GradientCheckError(
                f"gradient mismatch for {name}[{index}]: tape={analytic.reshape(-1)[index]:.6g} "
                f"finite-difference={numeric.reshape(-1)[index]:.6g}",
                name=name,
                index=index,
                analytic=analytic.reshape(-1)[index],
                numeric=numeric.reshape(-1)[index],
            )
        worst = max(worst, float(errors[position]))
    return worst
