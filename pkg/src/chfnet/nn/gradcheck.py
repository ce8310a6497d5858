"""Central finite-difference verification of analytic gradients."""
import numpy as np

from .model import backward, forward


def numerical_gradient(model, x, target, h=1e-5):
    """Central differences of the MSE loss, one parameter at a time.

    ``L(w+h) - L(w-h)`` is evaluated as ``mean((p+ - p-) * (p+ + p- - 2t))``,
    which is algebraically identical but avoids subtracting two nearly equal
    O(1) losses; small gradient entries stay accurate to ~1e-9 relative.
    """
    work = model.copy()
    p = work.params
    target = np.asarray(target, dtype=np.float64)
    grad = np.empty(model.n_params)
    for i in range(model.n_params):
        orig = p[i]
        p[i] = orig + h
        up = forward(work, x)
        p[i] = orig - h
        down = forward(work, x)
        p[i] = orig
        grad[i] = np.mean((up - down) * (up + down - 2.0 * target)) / (2.0 * h)
    return grad


def relative_errors(analytic, numeric, floor=1e-12):
    analytic = np.asarray(analytic)
    numeric = np.asarray(numeric)
    scale = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return np.abs(analytic - numeric) / scale


def gradient_check(model, x, target, h=1e-5, analytic=None):
    """Max relative error between analytic and finite-difference gradients.

    ``analytic`` overrides the gradient under test (default: :func:`backward`).
    Cost is two forward passes per parameter, so keep models small.
    """
    if analytic is None:
        analytic = backward(model, x, target)
    numeric = numerical_gradient(model, x, target, h)
    return float(np.max(relative_errors(analytic, numeric)))
