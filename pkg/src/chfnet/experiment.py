"""End-to-end experiment: LUT -> split -> scaling -> autoencoders -> DCNNs -> metrics.

Seeds
-----
Every random stage draws its seed from the master seed with
``derive_seed(master, stage, variant)``: the first 32-bit word of
``numpy.random.SeedSequence([master, STAGE[stage], VARIANT_ID[variant]])``.
The split uses variant ``base`` for all variants, so they share one split.

Output layout::

    <output_dir>/manifest.json        config, seeds, counts, file index
    <output_dir>/models/<v>.json|bin  DCNN per variant (+ ae_<v>.* for A1-A3)
    <output_dir>/predictions/<v>.csv  measured_chf, predicted_chf, split_tag
    <output_dir>/reports/metrics.json per-variant train/test metrics
    <output_dir>/reports/table.txt    aligned text table
    <output_dir>/reports/ranking.txt  variants by test R2 (2+ variants)
    <output_dir>/reports/history.json per-epoch losses
    <output_dir>/reports/split.json   seed and train/test indices
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import _jit
from .augment import VARIANT_LATENT, Autoencoder, AugmentationConfig, augment_dataset, train_autoencoder
from .config import SAMPLE_LUT, ExperimentConfig
from .dataset import Dataset, Standardizer, fit_standardizer, split, transform
from .errors import ChfnetError, ValidationError
from .lut import load_lut, flatten
from .metrics import MetricsReport, evaluate, format_table
from .nn import TrainConfig, build_dcnn, load_model, predict, save_model, train
from .sample import sample_lut_path

log = logging.getLogger(__name__)

STAGE = {"split": 0, "ae_init": 1, "ae_shuffle": 2, "dcnn_init": 3, "dcnn_shuffle": 4}
VARIANT_ID = {"base": 0, "A1": 1, "A2": 2, "A3": 3}
MODEL_NAMES = {"base": "DCNN_3F", "A1": "DCNN_3F-A1", "A2": "DCNN_3F-A2", "A3": "DCNN_3F-A3"}


class PipelineError(ChfnetError):
    """Wraps an upstream error with the pipeline stage it came from."""

    def __init__(self, stage, cause):
        self.stage = stage
        super().__init__(f"[{stage}] {cause}")


def derive_seed(master, stage, variant="base"):
    ss = np.random.SeedSequence([int(master), STAGE[stage], VARIANT_ID[variant]])
    return int(ss.generate_state(1)[0])


class Predictor:
    """Raw (P, G, x) -> CHF: standardizer, optional encoder, DCNN."""

    def __init__(self, variant, standardizer, dcnn, autoencoder=None, code_scaling=None):
        self.variant = variant
        self.standardizer = standardizer
        self.dcnn = dcnn
        self.autoencoder = autoencoder
        self.code_scaling = code_scaling

    @property
    def n_features(self):
        return self.dcnn.input_shape[0]

    def features(self, ds):
        """Standardized (and augmented) feature dataset for ``ds``."""
        out = transform(self.standardizer, ds)
        if self.autoencoder is not None:
            out = augment_dataset(out, self.autoencoder, self.code_scaling)
        return out

    def predict_features(self, ds):
        x = self.features(ds).features
        return predict(self.dcnn, x[:, :, None])[:, 0]

    def predict_raw(self, p, g, x):
        feats = np.column_stack([np.ravel(p), np.ravel(g), np.ravel(x)]).astype(np.float64)
        ds = Dataset(feats, np.zeros(len(feats)), ("pressure_mpa", "mass_flux_kg_m2s", "quality"))
        return self.predict_features(ds)

    def save(self, models_dir, meta=None):
        models_dir = Path(models_dir)
        meta = dict(meta or {})
        meta.update(variant=self.variant, model_name=MODEL_NAMES[self.variant],
                    standardizer=self.standardizer.to_dict(), autoencoder=None, code_scaling=None)
        if self.autoencoder is not None:
            ae_path = save_model(self.autoencoder.model, models_dir / f"ae_{self.variant}.json",
                                 meta={"role": "autoencoder", "variant": self.variant,
                                       "latent_dim": self.autoencoder.spec.latent_dim,
                                       "hidden_dim": self.autoencoder.spec.hidden_dim})
            meta["autoencoder"] = ae_path.name
            if self.code_scaling is not None:
                meta["code_scaling"] = [np.asarray(a).tolist() for a in self.code_scaling]
        return save_model(self.dcnn, models_dir / f"{self.variant}.json", meta=meta)

    @classmethod
    def load(cls, path):
        path = Path(path)
        dcnn, meta = load_model(path)
        if "standardizer" not in meta:
            raise ValidationError(f"{path}: not a DCNN pipeline model (no standardizer)")
        ae = None
        scaling = None
        if meta.get("autoencoder"):
            from .augment import AutoencoderSpec
            ae_model, ae_meta = load_model(path.parent / meta["autoencoder"])
            ae = Autoencoder(ae_model, AutoencoderSpec(3, ae_meta["hidden_dim"], ae_meta["latent_dim"]))
            if meta.get("code_scaling"):
                scaling = tuple(np.asarray(a) for a in meta["code_scaling"])
        return cls(meta["variant"], Standardizer.from_dict(meta["standardizer"]), dcnn, ae, scaling), meta


@dataclass
class VariantResult:
    train: MetricsReport
    test: MetricsReport
    n_features: int
    model_path: Optional[str] = None
    history: Optional[dict] = None
    ae_history: Optional[dict] = None
    ae_reconstruction_mse: Optional[float] = None
    n_params: Optional[int] = None

    def to_dict(self):
        return {"train": self.train.to_dict(), "test": self.test.to_dict(), "n_features": self.n_features,
                "model_path": self.model_path, "n_params": self.n_params,
                "ae_reconstruction_mse": self.ae_reconstruction_mse}


@dataclass
class RunReport:
    variants: Dict[str, VariantResult]
    split_manifest: Optional[dict] = None
    stamp: dict = field(default_factory=dict)
    # in-memory fitted objects, not serialized
    standardizer: Optional[Standardizer] = field(default=None, repr=False)
    predictors: Dict[str, Predictor] = field(default_factory=dict, repr=False)

    def metrics_dict(self):
        return {"stamp": self.stamp,
                "variants": {v: r.to_dict() for v, r in self.variants.items()}}

    def metrics_json(self):
        return json.dumps(self.metrics_dict(), indent=2, sort_keys=True) + "\n"

    def table(self):
        return format_table((MODEL_NAMES.get(v, v), r.train, r.test) for v, r in self.variants.items())


@dataclass
class Ranking:
    order: List[str]
    rows: List[dict]
    ties: List[tuple]

    def format(self):
        lines = ["rank  variant  model         test_R2   test_NRMSE  dR2_vs_base  dNRMSE_vs_base  dMAE_vs_base  dNSE_vs_base"]
        for i, row in enumerate(self.rows, start=1):
            d = row["delta_vs_base"]
            fmt = lambda k, p=4: "n/a" if d is None else f"{d[k]:+.{p}f}"
            lines.append(f"{i:>4}  {row['variant']:<7}  {MODEL_NAMES.get(row['variant'], row['variant']):<12}"
                         f"  {row['test_r2']:.4f}   {row['test_nrmse']:.4f}      {fmt('r2'):>11}  "
                         f"{fmt('nrmse'):>14}  {fmt('mae', 2):>12}  {fmt('nse'):>12}")
        for a, b in self.ties:
            lines.append(f"tie: {a} and {b} have equal test R2 and NRMSE; kept in input order")
        return "\n".join(lines) + "\n"


def compare_variants(report):
    """Order variants by test R2 (desc), then test NRMSE (asc); stable otherwise."""
    if len(report.variants) < 2:
        raise ValidationError("compare_variants needs at least two variants")
    items = list(report.variants.items())
    ranked = sorted(items, key=lambda kv: (-kv[1].test.r2, kv[1].test.nrmse))
    base = report.variants.get("base")
    rows = []
    for name, res in ranked:
        delta = None
        if base is not None:
            delta = {k: getattr(res.test, k) - getattr(base.test, k) for k in ("nrmse", "mae", "r2", "nse")}
        rows.append({"variant": name, "test_r2": res.test.r2, "test_nrmse": res.test.nrmse,
                     "delta_vs_base": delta})
    ties = [(a[0], b[0]) for a, b in zip(ranked, ranked[1:])
            if a[1].test.r2 == b[1].test.r2 and a[1].test.nrmse == b[1].test.nrmse]
    return Ranking([n for n, _ in ranked], rows, ties)


def export_predictions(model, ds, path, split_tag="all"):
    """Write measured vs predicted CHF for every sample of a raw dataset."""
    if ds.n_features != 3:
        raise ValidationError(f"expected the 3 base features, got {ds.n_features}")
    pred = model.predict_features(ds)
    write_predictions(path, [(ds.targets, pred, split_tag)])
    return pred


def write_predictions(path, blocks):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["measured_chf", "predicted_chf", "split_tag"])
        for measured, predicted, tag in blocks:
            for m, p in zip(measured, predicted):
                w.writerow([repr(float(m)), repr(float(p)), tag])


def read_predictions(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return (np.array([float(r["measured_chf"]) for r in rows]),
            np.array([float(r["predicted_chf"]) for r in rows]),
            [r["split_tag"] for r in rows])


def resolve_lut_path(lut_path):
    return sample_lut_path() if lut_path == SAMPLE_LUT else Path(lut_path)


def load_dataset(cfg):
    try:
        grid = load_lut(resolve_lut_path(cfg.lut_path), require_full_span=cfg.require_full_span)
    except (OSError, ChfnetError) as exc:
        raise PipelineError("ingest", exc) from exc
    ds = flatten(grid)
    log.info("ingested %s: %d nodes %s", cfg.lut_path, len(ds), grid.shape)
    return ds


def _train_cfgs(cfg, variant):
    common = dict(batch_size=cfg.batch_size, learning_rate=cfg.learning_rate,
                  beta1=cfg.beta1, beta2=cfg.beta2, epsilon=cfg.epsilon)
    ae = TrainConfig(epochs=cfg.ae_epochs or cfg.epochs, seed=derive_seed(cfg.seed, "ae_shuffle", variant), **common)
    dcnn = TrainConfig(epochs=cfg.epochs, seed=derive_seed(cfg.seed, "dcnn_shuffle", variant), **common)
    return ae, dcnn


def fit_variant(cfg, variant, standardizer, train_std, test_std=None):
    """Fit the autoencoder (if any) and the DCNN on training data only."""
    ae_cfg, dcnn_cfg = _train_cfgs(cfg, variant)
    ae = ae_history = scaling = None
    tr, te = train_std, test_std
    if variant != "base":
        aug = AugmentationConfig(variant, ae_cfg, cfg.ae_hidden_dim)
        try:
            ae, ae_history = train_autoencoder(tr.features, aug.spec, ae_cfg,
                                               seed=derive_seed(cfg.seed, "ae_init", variant))
        except ChfnetError as exc:
            raise PipelineError(f"autoencoder {variant}", exc) from exc
        if cfg.standardize_codes:
            z = ae.encode(tr.features)
            scaling = (z.mean(axis=0), z.std(axis=0))
        tr = augment_dataset(tr, ae, scaling)
        te = augment_dataset(te, ae, scaling) if te is not None else None
    model = build_dcnn(tr.n_features, seed=derive_seed(cfg.seed, "dcnn_init", variant))
    valid = (te.features[:, :, None], te.targets[:, None]) if te is not None else None
    try:
        model, history = train(model, (tr.features[:, :, None], tr.targets[:, None]), valid, dcnn_cfg)
    except ChfnetError as exc:
        raise PipelineError(f"dcnn {variant}", exc) from exc
    return Predictor(variant, standardizer, model, ae, scaling), history, ae_history


def run_pipeline(ds, cfg, output_dir=None):
    """Run every configured variant on ``ds``; write artifacts if ``output_dir``."""
    try:
        sp = split(ds, cfg.train_fraction, derive_seed(cfg.seed, "split"))
        standardizer = fit_standardizer(sp.train)
    except ChfnetError as exc:
        raise PipelineError("split", exc) from exc
    # only training statistics enter any fit below
    train_std = transform(standardizer, sp.train)
    test_std = transform(standardizer, sp.test)

    out = Path(output_dir) if output_dir is not None else None
    results, predictors, histories = {}, {}, {}
    for variant in cfg.variants:
        log.info("training variant %s", variant)
        pred, history, ae_history = fit_variant(cfg, variant, standardizer, train_std, test_std)
        p_train = pred.predict_features(sp.train)
        p_test = pred.predict_features(sp.test)
        try:
            res = VariantResult(evaluate(sp.train.targets, p_train), evaluate(sp.test.targets, p_test),
                                pred.n_features, n_params=pred.dcnn.n_params)
        except ChfnetError as exc:
            raise PipelineError(f"evaluate {variant}", exc) from exc
        if pred.autoencoder is not None:
            res.ae_reconstruction_mse = ae_history.train_loss[-1]
        res.history = history.to_dict()
        res.ae_history = ae_history.to_dict() if ae_history else None
        if out is not None:
            meta = {"train_config": _train_cfgs(cfg, variant)[1].to_dict(), "lut_path": str(cfg.lut_path)}
            res.model_path = str(pred.save(out / "models", meta).relative_to(out))
            write_predictions(out / "predictions" / f"{variant}.csv",
                              [(sp.train.targets, p_train, "train"), (sp.test.targets, p_test, "test")])
        log.info("%s: train %s | test %s", variant, res.train, res.test)
        results[variant] = res
        predictors[variant] = pred
        histories[variant] = {"dcnn": res.history, "autoencoder": res.ae_history}

    stamp = {
        "seed": cfg.seed,
        "n_samples": len(ds),
        "n_train": len(sp.train),
        "n_test": len(sp.test),
        "feature_counts": {v: r.n_features for v, r in results.items()},
        "kernels": "numba" if _jit.USE_NUMBA else "numpy",
    }
    report = RunReport(results, sp.manifest(), stamp, standardizer, predictors)
    if out is not None:
        _write_reports(out, cfg, report, histories)
    return report


def _write_reports(out, cfg, report, histories):
    reports = out / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    (reports / "metrics.json").write_text(report.metrics_json(), encoding="utf-8")
    (reports / "table.txt").write_text(report.table(), encoding="utf-8")
    (reports / "history.json").write_text(json.dumps(histories, sort_keys=True) + "\n", encoding="utf-8")
    (reports / "split.json").write_text(json.dumps(report.split_manifest) + "\n", encoding="utf-8")
    files = ["reports/metrics.json", "reports/table.txt", "reports/history.json", "reports/split.json"]
    if len(report.variants) >= 2:
        (reports / "ranking.txt").write_text(compare_variants(report).format(), encoding="utf-8")
        files.append("reports/ranking.txt")
    manifest = {
        "config": cfg.to_dict(),
        "seeds": {v: {s: derive_seed(cfg.seed, s, v if s != "split" else "base") for s in STAGE}
                  for v in report.variants},
        "stamp": report.stamp,
        "models": {v: r.model_path for v, r in report.variants.items()},
        "predictions": {v: f"predictions/{v}.csv" for v in report.variants},
        "reports": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def run_experiment(cfg):
    """Load the configured LUT and run :func:`run_pipeline` into ``cfg.output_dir``."""
    ds = load_dataset(cfg)
    return run_pipeline(ds, cfg, cfg.output_dir)
