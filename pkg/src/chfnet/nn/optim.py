"""Adam with bias correction, over flat parameter vectors."""
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n), np.zeros(n), 0)


def adam_step(params, grads, state, cfg):
    """Return ``(new_params, new_state)``; inputs are left untouched."""
    params = np.asarray(params, dtype=np.float64)
    grads = np.asarray(grads, dtype=np.float64)
    if not (params.shape == grads.shape == state.m.shape == state.v.shape):
        raise ValidationError("params, grads and Adam moments must share one shape")
    new_state = AdamState(state.m.copy(), state.v.copy(), state.step)
    new_params = params.copy()
    adam_update_(new_params, grads, new_state, cfg)
    return new_params, new_state


def adam_update_(params, grads, state, cfg):
    """In-place variant of :func:`adam_step` used by the training loop."""
    b1, b2 = cfg.beta1, cfg.beta2
    state.step += 1
    t = state.step
    m, v = state.m, state.v
    m *= b1
    m += (1.0 - b1) * grads
    v *= b2
    v += (1.0 - b2) * (grads * grads)
    lr_t = cfg.learning_rate / (1.0 - b1 ** t)
    denom = np.sqrt(v / (1.0 - b2 ** t))
    denom += cfg.epsilon
    params -= lr_t * m / denom
