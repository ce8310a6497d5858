"""Seeded mini-batch training loop."""
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from ..errors import TrainingDiverged, ValidationError
from .model import loss_and_grad, mse_loss, predict
from .optim import AdamState, adam_update_

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 32
    epochs: int = 200
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 1 or not self.learning_rate > 0:
            raise ValidationError(f"invalid training config: {self}")

    def to_dict(self):
        return asdict(self)


@dataclass
class TrainHistory:
    initial_train_loss: float
    train_loss: List[float] = field(default_factory=list)
    valid_loss: List[Optional[float]] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def full_loss(model, x, y):
    return mse_loss(predict(model, x), y)


def train(model, train_data, valid_data=None, cfg=TrainConfig()):
    """Train a copy of ``model`` with Adam on mini-batches of shuffled data.

    ``train_data`` and ``valid_data`` are ``(inputs, targets)`` pairs already
    shaped for the model. Runs ``epochs * ceil(N / batch_size)`` Adam steps;
    the last batch of an epoch may be short. Losses recorded per epoch are
    full-pass MSEs with the end-of-epoch parameters.

    Returns ``(trained_model, history)``.
    """
    x, y = (np.asarray(a, dtype=np.float64) for a in train_data)
    if len(x) != len(y) or len(x) == 0:
        raise ValidationError(f"{len(x)} inputs vs {len(y)} targets")
    if valid_data is not None:
        vx, vy = (np.asarray(a, dtype=np.float64) for a in valid_data)

    model = model.copy()
    n = len(x)
    bs = cfg.batch_size
    n_batches = math.ceil(n / bs)
    rng = np.random.default_rng(cfg.seed)
    state = AdamState.zeros(model.n_params)
    grad = np.zeros(model.n_params)
    history = TrainHistory(full_loss(model, x, y))

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for b in range(n_batches):
            idx = order[b * bs:(b + 1) * bs]
            loss, _ = loss_and_grad(model, x[idx], y[idx], out=grad)
            if not (math.isfinite(loss) and np.all(np.isfinite(grad))):
                raise TrainingDiverged(epoch, b, loss)
            adam_update_(model.params, grad, state, cfg)
        tl = full_loss(model, x, y)
        if not math.isfinite(tl):
            raise TrainingDiverged(epoch, n_batches, tl)
        history.train_loss.append(tl)
        history.valid_loss.append(full_loss(model, vx, vy) if valid_data is not None else None)
        if log.isEnabledFor(logging.DEBUG):
            log.debug("epoch %d/%d train %.6g valid %s", epoch + 1, cfg.epochs, tl, history.valid_loss[-1])
    return model, history
