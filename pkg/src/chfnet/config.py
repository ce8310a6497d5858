"""Experiment configuration: flat, typed ``key = value`` text files.

Example::

    # full four-variant matrix on the shipped sample grid
    lut_path = sample            # or a path, relative to this file
    seed = 42
    train_fraction = 0.8
    variants = base, A1, A2, A3
    output_dir = runs/demo
    epochs = 200
    batch_size = 32
    learning_rate = 0.001

Blank lines and ``#`` comments are ignored. Unknown keys are an error.
Booleans accept true/false/yes/no/1/0; lists are comma separated.
"""
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Tuple

from .errors import ValidationError

VARIANTS = ("base", "A1", "A2", "A3")
SAMPLE_LUT = "sample"


def _parse_bool(s):
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_list(s):
    return tuple(p.strip() for p in s.split(",") if p.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    lut_path: str = SAMPLE_LUT
    seed: int = 0
    train_fraction: float = 0.8
    variants: Tuple[str, ...] = VARIANTS
    output_dir: str = "runs/default"
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    ae_epochs: int = 0          # 0: same as epochs
    ae_hidden_dim: int = 8
    standardize_codes: bool = False
    require_full_span: bool = True

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValidationError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")
        if not self.variants:
            raise ValidationError("at least one variant is required")
        bad = [v for v in self.variants if v not in VARIANTS]
        if bad:
            raise ValidationError(f"unknown variant(s) {bad}; choose from {VARIANTS}")
        if len(set(self.variants)) != len(self.variants):
            raise ValidationError(f"duplicate variants in {self.variants}")
        # fixed run order regardless of how they were listed
        object.__setattr__(self, "variants", tuple(v for v in VARIANTS if v in self.variants))

    @classmethod
    def parsers(cls):
        simple = {bool: _parse_bool, int: int, float: float, str: str}
        return {f.name: simple.get(f.type, _parse_list) for f in fields(cls)}

    @classmethod
    def from_mapping(cls, mapping):
        parsers = cls.parsers()
        kwargs = {}
        for key, raw in mapping.items():
            if key not in parsers:
                raise ValidationError(f"unknown config key {key!r}")
            if isinstance(raw, str):
                try:
                    kwargs[key] = parsers[key](raw)
                except ValueError as exc:
                    raise ValidationError(f"config key {key!r}: {exc}") from None
            else:
                kwargs[key] = tuple(raw) if key == "variants" else raw
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        mapping = {}
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            if key in mapping:
                raise ValidationError(f"{path}:{lineno}: duplicate key {key!r}")
            mapping[key] = value
        cfg = cls.from_mapping(mapping)
        # relative paths are resolved against the config file's directory
        updates = {}
        if cfg.lut_path != SAMPLE_LUT and not Path(cfg.lut_path).is_absolute():
            updates["lut_path"] = str(path.parent / cfg.lut_path)
        if not Path(cfg.output_dir).is_absolute():
            updates["output_dir"] = str(path.parent / cfg.output_dir)
        return replace(cfg, **updates)

    def override(self, **kwargs):
        kwargs = {k: v for k, v in kwargs.items() if v is not None}
        return type(self).from_mapping({**asdict(self), **kwargs})

    def to_dict(self):
        d = asdict(self)
        d["variants"] = list(self.variants)
        return d

    def to_text(self):
        lines = []
        for k, v in self.to_dict().items():
            if isinstance(v, list):
                v = ", ".join(v)
            elif isinstance(v, bool):
                v = str(v).lower()
            lines.append(f"{k} = {v}")
        return "\n".join(lines) + "\n"
