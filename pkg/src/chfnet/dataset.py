"""Regression datasets built from the flattened LUT: stats, scaling, splits."""
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ValidationError

TARGET_NAME = "chf_kw_m2"


class Sample(NamedTuple):
    features: np.ndarray
    target: float


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix (N, F), target vector (N,) and column labels."""

    features: np.ndarray
    targets: np.ndarray
    feature_names: Sequence[str]

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64)
        y = np.array(self.targets, dtype=np.float64).reshape(-1)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValidationError(f"features must be a non-empty 2-D array, got shape {X.shape}")
        if y.shape[0] != X.shape[0]:
            raise ValidationError(f"{X.shape[0]} feature rows but {y.shape[0]} targets")
        names = tuple(self.feature_names)
        if len(names) != X.shape[1]:
            raise ValidationError(f"{len(names)} feature names for {X.shape[1]} columns")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ValidationError("dataset contains non-finite values")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "targets", y)
        object.__setattr__(self, "feature_names", names)

    def __len__(self):
        return self.features.shape[0]

    def __getitem__(self, i):
        return Sample(self.features[i], float(self.targets[i]))

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self.features[indices], self.targets[indices], self.feature_names)

    def with_features(self, features, feature_names):
        return Dataset(features, self.targets, feature_names)


@dataclass(frozen=True)
class ColumnStats:
    min: float
    max: float
    mean: float
    sd: float
    cv: Optional[float]


def _column_stats(col):
    mean = float(np.mean(col))
    sd = float(np.std(col))
    return ColumnStats(float(np.min(col)), float(np.max(col)), mean, sd,
                       sd / mean if mean != 0 else None)


def compute_stats(ds):
    """Per-column min/max/mean/sd/cv, features first and the target last.

    ``sd`` is the population form; ``cv`` is ``None`` when the mean is zero.
    """
    stats = {name: _column_stats(ds.features[:, i]) for i, name in enumerate(ds.feature_names)}
    stats[TARGET_NAME] = _column_stats(ds.targets)
    return stats


@dataclass(frozen=True, eq=False)
class Standardizer:
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=np.float64).reshape(-1)
        stds = np.array(self.stds, dtype=np.float64).reshape(-1)
        if means.shape != stds.shape:
            raise ValidationError("means and stds differ in length")
        if np.any(stds <= 0):
            raise ValidationError("standard deviations must be positive")
        means.setflags(write=False)
        stds.setflags(write=False)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)

    def to_dict(self):
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(d["means"], d["stds"])


def fit_standardizer(train):
    means = train.features.mean(axis=0)
    stds = train.features.std(axis=0)
    zero = [name for name, s in zip(train.feature_names, stds) if s == 0]
    if zero:
        raise ValidationError(f"zero-variance column(s): {', '.join(zero)}")
    return Standardizer(means, stds)


def _check_dim(s, ds):
    if ds.n_features != s.means.size:
        raise ValidationError(f"dataset has {ds.n_features} features, standardizer expects {s.means.size}")


def transform(s, ds):
    _check_dim(s, ds)
    return ds.with_features((ds.features - s.means) / s.stds, ds.feature_names)


def inverse_transform(s, ds):
    _check_dim(s, ds)
    return ds.with_features(ds.features * s.stds + s.means, ds.feature_names)


@dataclass(frozen=True, eq=False)
class SplitResult:
    train: Dataset
    test: Dataset
    seed: int
    train_indices: np.ndarray
    test_indices: np.ndarray

    def manifest(self):
        return {"seed": int(self.seed),
                "train_indices": [int(i) for i in self.train_indices],
                "test_indices": [int(i) for i in self.test_indices]}

    def write_manifest(self, path):
        Path(path).write_text(json.dumps(self.manifest(), indent=1) + "\n", encoding="utf-8")


def train_size(n, train_fraction):
    # round half up
    return int(math.floor(n * train_fraction + 0.5))


def split(ds, train_fraction=0.8, seed=0):
    """Seeded uniform shuffle followed by a prefix (train) / suffix (test) cut."""
    if not 0 < train_fraction < 1:
        raise ValidationError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n = len(ds)
    n_train = train_size(n, train_fraction)
    if n_train < 1 or n_train >= n:
        raise ValidationError(f"dataset of {n} samples too small for a {train_fraction} split")
    order = np.random.default_rng(seed).permutation(n)
    tr, te = order[:n_train], order[n_train:]
    return SplitResult(ds.subset(tr), ds.subset(te), seed, tr, te)


def split_from_manifest(ds, manifest):
    tr = np.asarray(manifest["train_indices"], dtype=np.intp)
    te = np.asarray(manifest["test_indices"], dtype=np.intp)
    if len(tr) + len(te) != len(ds) or len(np.union1d(tr, te)) != len(ds):
        raise ValidationError("split manifest does not partition the dataset")
    return SplitResult(ds.subset(tr), ds.subset(te), manifest["seed"], tr, te)


def write_csv(ds, path, target_name=TARGET_NAME):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(ds.feature_names) + [target_name])
        for row, t in zip(ds.features, ds.targets):
            w.writerow([repr(float(v)) for v in row] + [repr(float(t))])


def read_csv(path, target_name=TARGET_NAME):
    """Read a dataset CSV; the target column is located by name."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValidationError(f"{path}: empty file")
    header = [c.strip() for c in rows[0]]
    if target_name not in header:
        raise ValidationError(f"{path}: missing target column {target_name!r}")
    ti = header.index(target_name)
    try:
        arr = np.array([[float(c) for c in r] for r in rows[1:]])
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}") from None
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise ValidationError(f"{path}: ragged or empty rows")
    fcols = [i for i in range(len(header)) if i != ti]
    return Dataset(arr[:, fcols], arr[:, ti], [header[i] for i in fcols])
