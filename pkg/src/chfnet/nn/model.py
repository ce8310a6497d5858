"""Sequential network with a flat parameter vector.

Parameters of all layers live in one contiguous float64 vector, ordered by
layer, weights before biases, each tensor row-major. Per-layer arrays are
views into it, so optimisers and serialisation work on the flat vector.
"""
import math

import numpy as np

from ..errors import ValidationError
from .layers import LayerSpec, layer_backward, layer_forward

_GAIN = {"relu": math.sqrt(2.0), "tanh": 5.0 / 3.0, "linear": 1.0}


class NetworkModel:
    """Ordered layer specs plus their parameters.

    Parameters
    ----------
    layers : sequence of LayerSpec
    input_shape : tuple
        Shape of one sample, e.g. ``(5, 1)`` for a conv net on 5 features.
    params : array, optional
        Flat parameter vector; drawn from ``rng_seed`` when omitted.
    rng_seed : int
    """

    def __init__(self, layers, input_shape, params=None, rng_seed=0):
        self.layers = tuple(l if isinstance(l, LayerSpec) else LayerSpec.from_dict(l) for l in layers)
        if not self.layers:
            raise ValidationError("a model needs at least one layer")
        self.input_shape = tuple(int(s) for s in input_shape)
        self.rng_seed = int(rng_seed)

        shapes = [self.input_shape]
        for spec in self.layers:
            shapes.append(spec.output_shape(shapes[-1]))
        self.layer_shapes = shapes
        self.output_shape = shapes[-1]

        self._slices = []
        offset = 0
        for spec in self.layers:
            sl = []
            for shape in spec.param_shapes():
                size = math.prod(shape)
                sl.append((offset, offset + size, shape))
                offset += size
            self._slices.append(sl)
        self.n_params = offset

        if params is None:
            params = init_params(self)
        params = np.array(params, dtype=np.float64).reshape(-1)
        if params.size != self.n_params:
            raise ValidationError(f"expected {self.n_params} parameters, got {params.size}")
        self.params = params

    def views(self, flat=None):
        """Per-layer lists of arrays viewing into ``flat`` (default: the parameters)."""
        flat = self.params if flat is None else flat
        return [[flat[a:b].reshape(shape) for a, b, shape in sl] for sl in self._slices]

    def copy(self):
        return NetworkModel(self.layers, self.input_shape, self.params.copy(), self.rng_seed)

    def __repr__(self):
        kinds = ", ".join(s.kind if s.kind != "activation" else s.activation for s in self.layers)
        return f"NetworkModel(input_shape={self.input_shape}, n_params={self.n_params}, layers=[{kinds}])"


def _next_activation(layers, i):
    for spec in layers[i + 1:]:
        if spec.kind == "activation":
            return spec.activation
        if spec.kind in ("conv1d", "dense"):
            break
    return "linear"


def init_params(model):
    """Uniform fan-in scaled init, gain chosen by the activation that follows.

    Biases start at zero.
    """
    rng = np.random.default_rng(model.rng_seed)
    flat = np.zeros(model.n_params)
    for i, (spec, views) in enumerate(zip(model.layers, model.views(flat))):
        if not views:
            continue
        w = views[0]
        fan_in = math.prod(w.shape[:-1])
        bound = _GAIN[_next_activation(model.layers, i)] * math.sqrt(3.0 / fan_in)
        w[...] = rng.uniform(-bound, bound, size=w.shape)
    return flat


def _check_input(model, x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != len(model.input_shape) + 1 or x.shape[1:] != model.input_shape:
        raise ValidationError(f"batch shape {x.shape} does not match model input (n, {', '.join(map(str, model.input_shape))})")
    return x


def forward(model, x, n_layers=None):
    """Evaluate the first ``n_layers`` layers (default all) on a batch."""
    x = _check_input(model, x)
    views = model.views()
    for spec, params in list(zip(model.layers, views))[:n_layers]:
        x, _ = layer_forward(spec, params, x)
    return x


def predict(model, x, batch_size=8192):
    """:func:`forward` in chunks, to bound memory on large inputs."""
    x = _check_input(model, x)
    if len(x) <= batch_size:
        return forward(model, x)
    return np.concatenate([forward(model, x[i:i + batch_size]) for i in range(0, len(x), batch_size)])


def mse_loss(pred, target):
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValidationError(f"prediction shape {pred.shape} != target shape {target.shape}")
    d = pred - target
    return float(np.mean(d * d))


def loss_and_grad(model, x, target, out=None):
    """MSE loss and its gradient w.r.t. the flat parameter vector."""
    x = _check_input(model, x)
    views = model.views()
    caches = []
    for spec, params in zip(model.layers, views):
        x, cache = layer_forward(spec, params, x)
        caches.append(cache)
    target = np.asarray(target, dtype=np.float64)
    if x.shape != target.shape:
        raise ValidationError(f"prediction shape {x.shape} != target shape {target.shape}")
    diff = x - target
    loss = float(np.mean(diff * diff))

    grad = np.zeros(model.n_params) if out is None else out
    gviews = model.views(grad)
    g = (2.0 / diff.size) * diff
    for i in range(len(model.layers) - 1, -1, -1):
        g, pgrads = layer_backward(model.layers[i], views[i], caches[i], g)
        for dst, src in zip(gviews[i], pgrads):
            dst[...] = src
    return loss, grad


def backward(model, x, target):
    """Analytic gradient of :func:`mse_loss` as a flat vector (parameter order)."""
    return loss_and_grad(model, x, target)[1]
