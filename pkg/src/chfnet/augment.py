"""Autoencoder feature augmentation.

An undercomplete autoencoder (3 -> hidden -> k -> hidden -> 3) is fitted to the
standardized base features; its bottleneck code z (k values) is appended to
each sample. Variants A1, A2, A3 use k = 1, 2, 3.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .nn import Activation, Dense, NetworkModel, TrainConfig, forward, predict, train

VARIANT_LATENT = {"A1": 1, "A2": 2, "A3": 3}
N_BASE_FEATURES = 3


@dataclass(frozen=True)
class AutoencoderSpec:
    input_dim: int = N_BASE_FEATURES
    hidden_dim: int = 8
    latent_dim: int = 2

    def __post_init__(self):
        if min(self.input_dim, self.hidden_dim, self.latent_dim) < 1:
            raise ValidationError(f"autoencoder dims must be >= 1: {self}")
        # k == input_dim is allowed: variant A3 codes 3 features into 3 latents
        if self.latent_dim > self.input_dim:
            raise ValidationError(f"latent_dim {self.latent_dim} exceeds input_dim {self.input_dim}")


@dataclass(frozen=True)
class AugmentationConfig:
    variant: str
    train: TrainConfig = TrainConfig()
    hidden_dim: int = 8

    def __post_init__(self):
        if self.variant not in VARIANT_LATENT:
            raise ValidationError(f"unknown variant {self.variant!r}; expected one of {sorted(VARIANT_LATENT)}")

    @property
    def latent_dim(self):
        return VARIANT_LATENT[self.variant]

    @property
    def n_features(self):
        return N_BASE_FEATURES + self.latent_dim

    @property
    def spec(self):
        return AutoencoderSpec(N_BASE_FEATURES, self.hidden_dim, self.latent_dim)


class Autoencoder:
    """A trained (or freshly initialised) autoencoder.

    ``model`` is one sequential network; its first ``ENCODER_LAYERS`` layers
    form the encoder g, the rest the decoder f.
    """

    ENCODER_LAYERS = 3

    def __init__(self, model, spec):
        self.model = model
        self.spec = spec

    @classmethod
    def build(cls, spec, seed=0):
        layers = [
            Dense(spec.input_dim, spec.hidden_dim), Activation("tanh"), Dense(spec.hidden_dim, spec.latent_dim),
            Dense(spec.latent_dim, spec.hidden_dim), Activation("tanh"), Dense(spec.hidden_dim, spec.input_dim),
        ]
        return cls(NetworkModel(layers, (spec.input_dim,), rng_seed=seed), spec)

    def _check(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.shape[-1] != self.spec.input_dim:
            raise ValidationError(f"expected {self.spec.input_dim} features, got {x.shape[-1]}")
        return x

    def encode(self, x):
        return forward(self.model, self._check(x), n_layers=self.ENCODER_LAYERS)

    def reconstruct(self, x):
        return predict(self.model, self._check(x))

    def reconstruction_mse(self, x):
        x = self._check(x)
        return float(np.mean((self.reconstruct(x) - x) ** 2))


def check_standardized(x, lo=0.5, hi=2.0):
    sd = np.std(x, axis=0)
    bad = np.flatnonzero((sd < lo) | (sd > hi))
    if bad.size:
        raise ValidationError(
            f"input columns {bad.tolist()} have sd {sd[bad].round(4).tolist()}; "
            f"autoencoders expect standardized features (sd in [{lo}, {hi}])")


def train_autoencoder(data, spec, cfg=TrainConfig(), seed=0):
    """Fit an autoencoder to a standardized (N, input_dim) matrix.

    ``seed`` drives the weight init, ``cfg.seed`` the batch shuffling.
    Returns ``(autoencoder, history)``; ``history.train_loss[-1]`` is the
    reconstruction MSE over ``data`` with the final weights.
    """
    x = np.asarray(data, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise ValidationError(f"expected an (N, {spec.input_dim}) matrix, got {x.shape}")
    check_standardized(x)
    ae = Autoencoder.build(spec, seed)
    model, history = train(ae.model, (x, x), None, cfg)
    return Autoencoder(model, spec), history


def augment_dataset(ds, ae, standardize_codes=None):
    """Append the bottleneck codes as ``aug_1 .. aug_k``.

    ``standardize_codes`` is an optional ``(means, stds)`` pair applied to the
    codes (off by default).
    """
    if ds.n_features != N_BASE_FEATURES:
        raise ValidationError(f"augmentation needs exactly {N_BASE_FEATURES} base features, got {ds.n_features}")
    z = ae.encode(ds.features)
    if standardize_codes is not None:
        means, stds = standardize_codes
        z = (z - means) / stds
    names = list(ds.feature_names) + [f"aug_{i + 1}" for i in range(z.shape[1])]
    return ds.with_features(np.hstack([ds.features, z]), names)
