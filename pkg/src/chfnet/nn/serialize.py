"""Model files: a JSON header next to a raw little-endian float64 blob.

``<name>.json`` holds the layer specs, input shape, seed and free-form
metadata; ``<name>.bin`` holds the flat parameter vector in model order
(layer order, weights before biases, row-major; conv kernels are
``(kernel, in_channels, out_channels)``, dense weights ``(in, out)``).
"""
import hashlib
import json
from pathlib import Path

import numpy as np

from ..errors import ValidationError
from .model import NetworkModel

FORMAT = "chfnet-model"
VERSION = 1


def save_model(model, path, meta=None):
    """Write ``path`` (.json header) and its sibling .bin blob; return the header path."""
    path = Path(path).with_suffix(".json")
    blob_path = path.with_suffix(".bin")
    blob = model.params.astype("<f8").tobytes()
    header = {
        "format": FORMAT,
        "version": VERSION,
        "input_shape": list(model.input_shape),
        "layers": [s.to_dict() for s in model.layers],
        "rng_seed": model.rng_seed,
        "n_params": model.n_params,
        "param_order": "layer order, weights before biases, row-major",
        "blob": blob_path.name,
        "blob_sha256": hashlib.sha256(blob).hexdigest(),
        "meta": meta or {},
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    blob_path.write_bytes(blob)
    path.write_text(json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_header(path):
    header = json.loads(Path(path).read_text(encoding="utf-8"))
    if header.get("format") != FORMAT:
        raise ValidationError(f"{path}: not a {FORMAT} file")
    return header


def load_model(path):
    """Return ``(model, meta)``."""
    path = Path(path).with_suffix(".json")
    header = read_header(path)
    blob = (path.parent / header["blob"]).read_bytes()
    if hashlib.sha256(blob).hexdigest() != header["blob_sha256"]:
        raise ValidationError(f"{path}: parameter blob checksum mismatch")
    params = np.frombuffer(blob, dtype="<f8").astype(np.float64)
    model = NetworkModel(header["layers"], header["input_shape"], params, header["rng_seed"])
    return model, header.get("meta", {})
