"""Architectures used by the experiment."""
import logging

from ..errors import ValidationError
from .layers import Activation, Conv1D, Dense, Flatten
from .model import NetworkModel

log = logging.getLogger(__name__)

DCNN_CHANNELS = (16, 32, 64, 64, 32)
DCNN_HIDDEN = (64, 16)
SUPPORTED_INPUT_LENGTHS = (3, 4, 5, 6)


def build_dcnn(input_length, seed=0):
    """Five same-padded conv1d layers (kernel 3) and three dense layers.

    Input is ``(n, input_length, 1)``; output ``(n, 1)``. ReLU after every
    hidden layer, linear output.
    """
    if input_length not in SUPPORTED_INPUT_LENGTHS:
        raise ValidationError(f"input_length must be one of {SUPPORTED_INPUT_LENGTHS}, got {input_length}")
    layers = []
    c_in = 1
    for c_out in DCNN_CHANNELS:
        layers += [Conv1D(c_in, c_out, 3, "same"), Activation("relu")]
        c_in = c_out
    layers.append(Flatten())
    width = c_in * input_length
    for h in DCNN_HIDDEN:
        layers += [Dense(width, h), Activation("relu")]
        width = h
    layers.append(Dense(width, 1))
    model = NetworkModel(layers, (input_length, 1), rng_seed=seed)
    log.info("build_dcnn(input_length=%d): %d parameters", input_length, model.n_params)
    return model


def build_mlp(n_inputs, hidden=(32, 32), n_outputs=1, activation="relu", seed=0):
    layers = []
    width = n_inputs
    for h in hidden:
        layers += [Dense(width, h), Activation(activation)]
        width = h
    layers.append(Dense(width, n_outputs))
    return NetworkModel(layers, (n_inputs,), rng_seed=seed)
