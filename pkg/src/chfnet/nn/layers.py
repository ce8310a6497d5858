"""Layer specifications and their per-kind forward/backward rules.

Supported kinds: ``conv1d`` (channels-last, ``same`` or ``valid`` padding),
``dense``, ``activation`` (relu, tanh, linear) and ``flatten``.
"""
from dataclasses import asdict, dataclass

import numpy as np

from .. import kernels
from ..errors import ValidationError

KINDS = ("conv1d", "dense", "activation", "flatten")
ACTIVATIONS = ("relu", "tanh", "linear")
PADDINGS = ("same", "valid")


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    in_channels: int = 0
    out_channels: int = 0
    kernel_size: int = 0
    padding: str = "same"
    in_features: int = 0
    out_features: int = 0
    activation: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown layer kind {self.kind!r}")
        if self.kind == "conv1d":
            if min(self.in_channels, self.out_channels, self.kernel_size) < 1:
                raise ValidationError(f"conv1d extents must be positive: {self}")
            if self.padding not in PADDINGS:
                raise ValidationError(f"unknown padding {self.padding!r}")
            if self.padding == "same" and self.kernel_size % 2 == 0:
                raise ValidationError("'same' padding needs an odd kernel_size")
        elif self.kind == "dense":
            if min(self.in_features, self.out_features) < 1:
                raise ValidationError(f"dense extents must be positive: {self}")
        elif self.kind == "activation" and self.activation not in ACTIVATIONS:
            raise ValidationError(f"unknown activation {self.activation!r}")

    @property
    def pad(self):
        return (self.kernel_size - 1) // 2 if self.padding == "same" else 0

    def param_shapes(self):
        if self.kind == "conv1d":
            return [(self.kernel_size, self.in_channels, self.out_channels), (self.out_channels,)]
        if self.kind == "dense":
            return [(self.in_features, self.out_features), (self.out_features,)]
        return []

    def output_shape(self, in_shape):
        """Shape of one sample after this layer, or raise on mismatch."""
        in_shape = tuple(in_shape)
        if self.kind == "conv1d":
            if len(in_shape) != 2 or in_shape[1] != self.in_channels:
                raise ValidationError(f"conv1d expects (length, {self.in_channels}), got {in_shape}")
            length = in_shape[0] + 2 * self.pad - self.kernel_size + 1
            if length < 1:
                raise ValidationError(f"input length {in_shape[0]} too short for kernel {self.kernel_size}")
            return (length, self.out_channels)
        if self.kind == "dense":
            if in_shape != (self.in_features,):
                raise ValidationError(f"dense expects ({self.in_features},), got {in_shape}")
            return (self.out_features,)
        if self.kind == "flatten":
            return (int(np.prod(in_shape)),)
        return in_shape

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def Conv1D(in_channels, out_channels, kernel_size=3, padding="same"):
    return LayerSpec("conv1d", in_channels=in_channels, out_channels=out_channels,
                     kernel_size=kernel_size, padding=padding)


def Dense(in_features, out_features):
    return LayerSpec("dense", in_features=in_features, out_features=out_features, padding="")


def Activation(name):
    return LayerSpec("activation", activation=name, padding="")


def Flatten():
    return LayerSpec("flatten", padding="")


def layer_forward(spec, params, x):
    """Return ``(output, cache)``; ``cache`` is whatever backward needs."""
    kind = spec.kind
    if kind == "conv1d":
        w, b = params
        return kernels.conv1d_forward(x, w, b, spec.pad), x
    if kind == "dense":
        w, b = params
        return x @ w + b, x
    if kind == "flatten":
        return x.reshape(x.shape[0], -1), x.shape
    act = spec.activation
    if act == "relu":
        return np.maximum(x, 0.0), x
    if act == "tanh":
        y = np.tanh(x)
        return y, y
    return x, None


def layer_backward(spec, params, cache, grad_out):
    """Return ``(grad_input, [grad_w, grad_b] or [])``."""
    kind = spec.kind
    if kind == "conv1d":
        w, _ = params
        gx, gw, gb = kernels.conv1d_backward(cache, w, grad_out, spec.pad)
        return gx, [gw, gb]
    if kind == "dense":
        w, _ = params
        return grad_out @ w.T, [cache.T @ grad_out, grad_out.sum(axis=0)]
    if kind == "flatten":
        return grad_out.reshape(cache), []
    act = spec.activation
    if act == "relu":
        return grad_out * (cache > 0.0), []
    if act == "tanh":
        return grad_out * (1.0 - cache * cache), []
    return grad_out, []
